//! Executable correspondence between the two semantics.
//!
//! Every check compares two finite sets exactly: the traces derived from the
//! transition system against the compositional denotation, or the two sides
//! of one of the structural lemmas. Random terms drive campaigns; a failing
//! term is shrunk by replacing operators with their operands.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::denotational::{eval_compensable, eval_standard, DenotationError};
use crate::operational::{Engine, EngineError};
use crate::syntax::{pretty, pretty_standard};
use crate::terms::{CompensableTerm, Event, Sort, StandardTerm, SyncSet, Term};
use crate::trace::{parallel_traces, seq_traces, Trace, TracePair};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Denotation(#[from] DenotationError),
    #[error("lemma `{kind}` needs {expected} operands")]
    IllSorted { kind: LemmaKind, expected: Sort },
}

/// One element of a compared set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Observation {
    Trace(Trace),
    Pair(TracePair),
    /// A forward run and the compensation it leaves behind.
    Run(Trace, StandardTerm),
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observation::Trace(t) => write!(f, "{t}"),
            Observation::Pair(tt) => write!(f, "{tt}"),
            Observation::Run(t, residual) => write!(f, "{t} => {}", pretty_standard(residual)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CheckStats {
    pub states: usize,
    pub traces: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub term: Term,
    pub holds: bool,
    /// In the denotation (or right-hand side) but not derived.
    pub missing_in_dt: BTreeSet<Observation>,
    /// Derived (or left-hand side) but not in the denotation.
    pub missing_in_t: BTreeSet<Observation>,
    pub stats: CheckStats,
}

impl CheckReport {
    fn compare(
        term: Term,
        derived: BTreeSet<Observation>,
        denoted: BTreeSet<Observation>,
        states: usize,
        elapsed: Duration,
    ) -> Self {
        let missing_in_dt: BTreeSet<_> = denoted.difference(&derived).cloned().collect();
        let missing_in_t: BTreeSet<_> = derived.difference(&denoted).cloned().collect();
        CheckReport {
            term,
            holds: missing_in_dt.is_empty() && missing_in_t.is_empty(),
            missing_in_dt,
            missing_in_t,
            stats: CheckStats {
                states,
                traces: derived.len(),
                elapsed,
            },
        }
    }
}

/// Deterministic summary; the elapsed time is left out.
impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.holds { "holds" } else { "fails" };
        writeln!(f, "{verdict}: {}", pretty(&self.term))?;
        writeln!(
            f,
            "states: {}, traces: {}",
            self.stats.states, self.stats.traces
        )?;
        for (title, set) in [
            ("missing in DT", &self.missing_in_dt),
            ("missing in T", &self.missing_in_t),
        ] {
            if !set.is_empty() {
                writeln!(f, "{title}:")?;
                for obs in set {
                    writeln!(f, "  {obs}")?;
                }
            }
        }
        Ok(())
    }
}

// std::time::Instant panics on wasm32-unknown-unknown.
struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    fn start() -> Self {
        Stopwatch {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    fn elapsed(&self) -> Duration {
        #[cfg(not(target_arch = "wasm32"))]
        return self.start.elapsed();
        #[cfg(target_arch = "wasm32")]
        return Duration::ZERO;
    }
}

pub fn check_theorem1_standard(
    engine: &Engine,
    term: &StandardTerm,
) -> Result<CheckReport, CheckError> {
    let clock = Stopwatch::start();
    let denoted = eval_standard(term)?;
    let (derived, states) = engine.explore_standard(term)?;
    Ok(CheckReport::compare(
        term.clone().into(),
        derived.into_iter().map(Observation::Trace).collect(),
        denoted
            .into_traces()
            .into_iter()
            .map(Observation::Trace)
            .collect(),
        states,
        clock.elapsed(),
    ))
}

pub fn check_theorem1_compensable(
    engine: &Engine,
    term: &CompensableTerm,
) -> Result<CheckReport, CheckError> {
    let clock = Stopwatch::start();
    let denoted = eval_compensable(term)?;
    let (derived, states) = engine.explore_compensable(term)?;
    Ok(CheckReport::compare(
        term.clone().into(),
        derived.into_iter().map(Observation::Pair).collect(),
        denoted
            .into_pairs()
            .into_iter()
            .map(Observation::Pair)
            .collect(),
        states,
        clock.elapsed(),
    ))
}

pub fn check_theorem1(engine: &Engine, term: &Term) -> Result<CheckReport, CheckError> {
    match term {
        Term::Standard(p) => check_theorem1_standard(engine, p),
        Term::Compensable(pp) => check_theorem1_compensable(engine, pp),
    }
}

/// The structural lemmas relating a composite's transitions to its operands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LemmaKind {
    /// Sequential composition of standard processes.
    Seq,
    /// Synchronised parallel composition of standard processes.
    SynStd,
    /// Compensable parallel runs that complete: the residual is the parallel
    /// composition of the operands' compensations.
    NonDead,
    /// Compensable parallel runs that end in `bot`.
    Dead,
}

impl LemmaKind {
    pub const ALL: [LemmaKind; 4] = [
        LemmaKind::Seq,
        LemmaKind::SynStd,
        LemmaKind::NonDead,
        LemmaKind::Dead,
    ];

    pub fn operand_sort(self) -> Sort {
        match self {
            LemmaKind::Seq | LemmaKind::SynStd => Sort::Standard,
            LemmaKind::NonDead | LemmaKind::Dead => Sort::Compensable,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LemmaKind::Seq => "seq",
            LemmaKind::SynStd => "synstd",
            LemmaKind::NonDead => "nondead",
            LemmaKind::Dead => "dead",
        }
    }
}

impl fmt::Display for LemmaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for LemmaKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LemmaKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown lemma `{s}` (expected seq, synstd, nondead or dead)"))
    }
}

/// Operands for one lemma check. `sync` is ignored by [`LemmaKind::Seq`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaInstance {
    pub kind: LemmaKind,
    pub sync: SyncSet,
    pub left: Term,
    pub right: Term,
}

impl LemmaInstance {
    /// The composite term whose transitions the lemma describes.
    pub fn composite(&self) -> Result<Term, CheckError> {
        let ill = || CheckError::IllSorted {
            kind: self.kind,
            expected: self.kind.operand_sort(),
        };
        match (self.kind, &self.left, &self.right) {
            (LemmaKind::Seq, Term::Standard(p), Term::Standard(q)) => {
                Ok(StandardTerm::seq(p.clone(), q.clone()).into())
            }
            (LemmaKind::SynStd, Term::Standard(p), Term::Standard(q)) => {
                Ok(StandardTerm::par(self.sync.clone(), p.clone(), q.clone()).into())
            }
            (
                LemmaKind::NonDead | LemmaKind::Dead,
                Term::Compensable(pp),
                Term::Compensable(qq),
            ) => Ok(CompensableTerm::par(self.sync.clone(), pp.clone(), qq.clone()).into()),
            _ => Err(ill()),
        }
    }
}

/// Evaluates both sides of a lemma by enumeration: the left side through the
/// engine on the composite, the right side by combining operand enumerations
/// with the trace-level operator.
pub fn check_lemma(engine: &Engine, instance: &LemmaInstance) -> Result<CheckReport, CheckError> {
    let clock = Stopwatch::start();
    let composite = instance.composite()?;
    let x = &instance.sync;
    let (lhs, rhs, states) = match (&instance.left, &instance.right, &composite) {
        (Term::Standard(p), Term::Standard(q), Term::Standard(pq)) => {
            let (lhs, states) = engine.explore_standard(pq)?;
            let dp = engine.derived_traces_standard(p)?;
            let dq = engine.derived_traces_standard(q)?;
            let mut rhs = BTreeSet::new();
            for p in &dp {
                for q in &dq {
                    match instance.kind {
                        LemmaKind::Seq => {
                            rhs.insert(seq_traces(p, q));
                        }
                        _ => rhs.extend(parallel_traces(x, p, q)),
                    }
                }
            }
            let wrap = |s: BTreeSet<Trace>| {
                s.into_iter()
                    .map(Observation::Trace)
                    .collect::<BTreeSet<_>>()
            };
            (wrap(lhs), wrap(rhs), states)
        }
        (Term::Compensable(pp), Term::Compensable(qq), Term::Compensable(ppqq)) => {
            let runs = engine.forward_runs(ppqq)?;
            let fp = engine.forward_runs(pp)?;
            let fq = engine.forward_runs(qq)?;
            let states = runs.len();
            if instance.kind == LemmaKind::NonDead {
                let lhs = runs
                    .into_iter()
                    .filter(|(t, _)| !t.is_partial())
                    .map(|(t, r)| Observation::Run(t, r))
                    .collect();
                (lhs, nondead_rhs(x, &fp, &fq), states)
            } else {
                let lhs = runs
                    .into_iter()
                    .filter(|(t, _)| t.is_partial())
                    .map(|(t, _)| Observation::Trace(t))
                    .collect();
                let rhs = dead_rhs(x, &fp, &fq)
                    .into_iter()
                    .map(Observation::Trace)
                    .collect();
                (lhs, rhs, states)
            }
        }
        _ => unreachable!("composite() checked the operand sorts"),
    };
    Ok(CheckReport::compare(
        composite,
        lhs,
        rhs,
        states,
        clock.elapsed(),
    ))
}

type Runs = BTreeSet<(Trace, StandardTerm)>;

fn nondead_rhs(x: &SyncSet, fp: &Runs, fq: &Runs) -> BTreeSet<Observation> {
    let mut out = BTreeSet::new();
    for (p, comp_p) in fp {
        for (q, comp_q) in fq {
            for t in parallel_traces(x, p, q) {
                if !t.is_partial() {
                    let residual = StandardTerm::par(x.clone(), comp_p.clone(), comp_q.clone());
                    out.insert(Observation::Run(t, residual));
                }
            }
        }
    }
    out
}

fn dead_rhs(x: &SyncSet, fp: &Runs, fq: &Runs) -> BTreeSet<Trace> {
    let forwards = |runs: &Runs| runs.iter().map(|(t, _)| t.clone()).collect::<BTreeSet<_>>();
    let (fp, fq) = (forwards(fp), forwards(fq));
    let mut out = BTreeSet::new();
    for p in &fp {
        for q in &fq {
            out.extend(
                parallel_traces(x, p, q)
                    .into_iter()
                    .filter(Trace::is_partial),
            );
        }
    }
    out
}

/// Result of sorting every derived pair of a compensable parallel
/// composition into the completing or the deadlocking lemma.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PartitionReport {
    pub checked: usize,
    pub completing: usize,
    pub partial: usize,
    /// Derived pairs matching no clause or both, with the number matched.
    pub violations: Vec<(TracePair, usize)>,
}

pub fn lemma_partition(
    engine: &Engine,
    x: &SyncSet,
    pp: &CompensableTerm,
    qq: &CompensableTerm,
) -> Result<PartitionReport, CheckError> {
    let composite = CompensableTerm::par(x.clone(), pp.clone(), qq.clone());
    let derived = engine.derived_traces_compensable(&composite)?;
    let fp = engine.forward_runs(pp)?;
    let fq = engine.forward_runs(qq)?;
    let completing = nondead_rhs(x, &fp, &fq);
    let partial = dead_rhs(x, &fp, &fq);

    let mut by_forward: HashMap<&Trace, Vec<&StandardTerm>> = HashMap::new();
    for obs in &completing {
        if let Observation::Run(t, residual) = obs {
            by_forward.entry(t).or_default().push(residual);
        }
    }
    let mut residual_traces: HashMap<&StandardTerm, BTreeSet<Trace>> = HashMap::new();
    let mut report = PartitionReport::default();
    for pair in derived {
        report.checked += 1;
        let mut in_completing = false;
        if !pair.forward.is_partial() {
            for residual in by_forward.get(&pair.forward).into_iter().flatten() {
                if !residual_traces.contains_key(residual) {
                    residual_traces.insert(residual, engine.derived_traces_standard(residual)?);
                }
                if residual_traces[residual].contains(&pair.compensation) {
                    in_completing = true;
                    break;
                }
            }
        }
        let in_partial = pair.forward.is_partial()
            && pair.compensation == Trace::bot()
            && partial.contains(&pair.forward);
        report.completing += usize::from(in_completing);
        report.partial += usize::from(in_partial);
        let matched = usize::from(in_completing) + usize::from(in_partial);
        if matched != 1 {
            report.violations.push((pair, matched));
        }
    }
    Ok(report)
}

/// Operands of the `index`-th generated compensable parallel composition.
pub fn partition_instance(
    cfg: &GenConfig,
    index: u64,
) -> (SyncSet, CompensableTerm, CompensableTerm) {
    let instance = generate_lemma_instance(&cfg.for_item(index, 32), LemmaKind::NonDead);
    match (instance.left, instance.right) {
        (Term::Compensable(pp), Term::Compensable(qq)) => (instance.sync, pp, qq),
        _ => unreachable!("compensable lemma operands"),
    }
}

/// [`lemma_partition`] over `count` generated triples, merged.
pub fn run_partition_campaign(
    engine: &Engine,
    cfg: &GenConfig,
    count: u64,
) -> Result<PartitionReport, CheckError> {
    let mut total = PartitionReport::default();
    for index in 0..count {
        let (x, pp, qq) = partition_instance(cfg, index);
        let report = lemma_partition(engine, &x, &pp, &qq)?;
        total.checked += report.checked;
        total.completing += report.completing;
        total.partial += report.partial;
        total.violations.extend(report.violations);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("max_size must be at least 1")]
    ZeroSize,
    #[error("the alphabet must not be empty")]
    EmptyAlphabet,
    #[error("sync_density must lie in [0, 1], got {0}")]
    Density(String),
}

/// Parameters of the random term generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    pub max_size: usize,
    pub alphabet: Vec<Event>,
    pub sync_density: f64,
}

impl GenConfig {
    pub fn new(
        seed: u64,
        max_size: usize,
        alphabet: Vec<Event>,
        sync_density: f64,
    ) -> Result<Self, ConfigError> {
        let cfg = GenConfig {
            seed,
            max_size,
            alphabet,
            sync_density,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_size == 0 {
            return Err(ConfigError::ZeroSize);
        }
        if self.alphabet.is_empty() {
            return Err(ConfigError::EmptyAlphabet);
        }
        if !(0.0..=1.0).contains(&self.sync_density) {
            return Err(ConfigError::Density(self.sync_density.to_string()));
        }
        Ok(())
    }

    /// The configuration used for item `index` of a campaign.
    pub fn for_item(&self, index: u64, stream: u64) -> GenConfig {
        GenConfig {
            seed: mix_seed(self.seed, index, stream),
            ..self.clone()
        }
    }
}

impl Default for GenConfig {
    fn default() -> Self {
        let alphabet = ["a", "b", "c"]
            .iter()
            .map(|n| Event::new(n).expect("valid name"))
            .collect();
        GenConfig {
            seed: 0,
            max_size: 7,
            alphabet,
            sync_density: 0.5,
        }
    }
}

// splitmix64 finaliser over the three inputs.
fn mix_seed(seed: u64, index: u64, stream: u64) -> u64 {
    let mut z = seed
        ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The smallest compensable term is a pair of two leaves.
pub const MIN_COMPENSABLE_SIZE: usize = 3;

/// Deterministic random term of at most `cfg.max_size` nodes (compensable
/// terms are never smaller than [`MIN_COMPENSABLE_SIZE`]).
pub fn generate_term(cfg: &GenConfig, sort: Sort) -> Term {
    let mut gen = Generator::new(cfg);
    match sort {
        Sort::Standard => gen.standard(cfg.max_size).into(),
        Sort::Compensable => gen.compensable(cfg.max_size).into(),
    }
}

pub fn generate_lemma_instance(cfg: &GenConfig, kind: LemmaKind) -> LemmaInstance {
    let mut gen = Generator::new(cfg);
    let sync = gen.sync_set();
    let (left, right) = match kind.operand_sort() {
        Sort::Standard => (
            gen.standard(cfg.max_size).into(),
            gen.standard(cfg.max_size).into(),
        ),
        Sort::Compensable => (
            gen.compensable(cfg.max_size).into(),
            gen.compensable(cfg.max_size).into(),
        ),
    };
    LemmaInstance {
        kind,
        sync,
        left,
        right,
    }
}

struct Generator<'c> {
    cfg: &'c GenConfig,
    rng: ChaCha8Rng,
}

#[derive(Clone, Copy)]
enum StdShape {
    Leaf,
    Seq,
    Choice,
    Handler,
    Par,
    Block,
}

#[derive(Clone, Copy)]
enum CompShape {
    Pair,
    Seq,
    Choice,
    Par,
}

impl<'c> Generator<'c> {
    fn new(cfg: &'c GenConfig) -> Self {
        Generator {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        }
    }

    fn sync_set(&mut self) -> SyncSet {
        let density = self.cfg.sync_density;
        let mut members = Vec::new();
        for e in &self.cfg.alphabet {
            if self.rng.gen_bool(density) {
                members.push(e.clone());
            }
        }
        members.into_iter().collect()
    }

    fn leaf(&mut self) -> StandardTerm {
        match self.rng.gen_range(0..4) {
            0 => {
                let e = self
                    .cfg
                    .alphabet
                    .choose(&mut self.rng)
                    .expect("non-empty alphabet");
                StandardTerm::Atom(e.clone())
            }
            1 => StandardTerm::Skip,
            2 => StandardTerm::Throw,
            _ => StandardTerm::Yield,
        }
    }

    // Budget for the two operands of a binary node.
    fn split(&mut self, budget: usize, min_each: usize) -> (usize, usize) {
        let rest = budget - 1;
        let left = self.rng.gen_range(min_each..=rest - min_each);
        (left, rest - left)
    }

    fn standard(&mut self, budget: usize) -> StandardTerm {
        let mut shapes = vec![StdShape::Leaf];
        if budget >= 3 {
            shapes.extend([
                StdShape::Seq,
                StdShape::Choice,
                StdShape::Handler,
                StdShape::Par,
            ]);
        }
        if budget > MIN_COMPENSABLE_SIZE {
            shapes.push(StdShape::Block);
        }
        let shape = *shapes
            .choose(&mut self.rng)
            .expect("at least the leaf shape");
        if let StdShape::Leaf = shape {
            return self.leaf();
        }
        if let StdShape::Block = shape {
            return StandardTerm::block(self.compensable(budget - 1));
        }
        let (lb, rb) = self.split(budget, 1);
        let x = matches!(shape, StdShape::Par).then(|| self.sync_set());
        let p = self.standard(lb);
        let q = self.standard(rb);
        match shape {
            StdShape::Seq => StandardTerm::seq(p, q),
            StdShape::Choice => StandardTerm::choice(p, q),
            StdShape::Handler => StandardTerm::handler(p, q),
            StdShape::Par => StandardTerm::par(x.unwrap_or_default(), p, q),
            StdShape::Leaf | StdShape::Block => unreachable!(),
        }
    }

    fn compensable(&mut self, budget: usize) -> CompensableTerm {
        let budget = budget.max(MIN_COMPENSABLE_SIZE);
        let mut shapes = vec![CompShape::Pair];
        if budget > 2 * MIN_COMPENSABLE_SIZE {
            shapes.extend([CompShape::Seq, CompShape::Choice, CompShape::Par]);
        }
        let shape = *shapes
            .choose(&mut self.rng)
            .expect("at least the pair shape");
        if let CompShape::Pair = shape {
            let (lb, rb) = self.split(budget, 1);
            let p = self.standard(lb);
            let q = self.standard(rb);
            return CompensableTerm::pair(p, q);
        }
        let (lb, rb) = self.split(budget, MIN_COMPENSABLE_SIZE);
        let x = matches!(shape, CompShape::Par).then(|| self.sync_set());
        let pp = self.compensable(lb);
        let qq = self.compensable(rb);
        match shape {
            CompShape::Seq => CompensableTerm::seq(pp, qq),
            CompShape::Choice => CompensableTerm::choice(pp, qq),
            CompShape::Par => CompensableTerm::par(x.unwrap_or_default(), pp, qq),
            CompShape::Pair => unreachable!(),
        }
    }
}

fn measure(term: &Term) -> (usize, usize) {
    fn std_sync(t: &StandardTerm) -> usize {
        use StandardTerm::*;
        match t {
            Atom(_) | Skip | Throw | Yield | Null => 0,
            Seq(p, q) | Choice(p, q) | IntHandler(p, q) => std_sync(p) + std_sync(q),
            SyncPar(x, p, q) => x.len() + std_sync(p) + std_sync(q),
            Block(pp) => comp_sync(pp),
        }
    }
    fn comp_sync(t: &CompensableTerm) -> usize {
        use CompensableTerm::*;
        match t {
            Null => 0,
            Pair(p, q) => std_sync(p) + std_sync(q),
            Seq(pp, qq) | Choice(pp, qq) => comp_sync(pp) + comp_sync(qq),
            SyncPar(x, pp, qq) => x.len() + comp_sync(pp) + comp_sync(qq),
        }
    }
    let sync = match term {
        Term::Standard(p) => std_sync(p),
        Term::Compensable(pp) => comp_sync(pp),
    };
    (term.size(), sync)
}

fn std_candidates(term: &StandardTerm) -> Vec<StandardTerm> {
    use StandardTerm::*;
    let mut out = Vec::new();
    let rebuild = |p: &StandardTerm,
                   q: &StandardTerm,
                   out: &mut Vec<StandardTerm>,
                   make: &dyn Fn(StandardTerm, StandardTerm) -> StandardTerm| {
        out.push(p.clone());
        out.push(q.clone());
        for p2 in std_candidates(p) {
            out.push(make(p2, q.clone()));
        }
        for q2 in std_candidates(q) {
            out.push(make(p.clone(), q2));
        }
    };
    match term {
        Atom(_) | Skip | Throw | Yield | Null => {}
        Seq(p, q) => rebuild(p, q, &mut out, &StandardTerm::seq),
        Choice(p, q) => rebuild(p, q, &mut out, &StandardTerm::choice),
        IntHandler(p, q) => rebuild(p, q, &mut out, &StandardTerm::handler),
        SyncPar(x, p, q) => {
            rebuild(p, q, &mut out, &|a, b| StandardTerm::par(x.clone(), a, b));
            for e in x.iter() {
                out.push(StandardTerm::par(
                    x.without(e),
                    (**p).clone(),
                    (**q).clone(),
                ));
            }
        }
        Block(pp) => {
            if let CompensableTerm::Pair(p, q) = &**pp {
                out.push((**p).clone());
                out.push((**q).clone());
            }
            out.extend(comp_candidates(pp).into_iter().map(StandardTerm::block));
        }
    }
    out
}

fn comp_candidates(term: &CompensableTerm) -> Vec<CompensableTerm> {
    use CompensableTerm::*;
    let mut out = Vec::new();
    let rebuild =
        |pp: &CompensableTerm,
         qq: &CompensableTerm,
         out: &mut Vec<CompensableTerm>,
         make: &dyn Fn(CompensableTerm, CompensableTerm) -> CompensableTerm| {
            out.push(pp.clone());
            out.push(qq.clone());
            for pp2 in comp_candidates(pp) {
                out.push(make(pp2, qq.clone()));
            }
            for qq2 in comp_candidates(qq) {
                out.push(make(pp.clone(), qq2));
            }
        };
    match term {
        Null => {}
        Pair(p, q) => {
            for p2 in std_candidates(p) {
                out.push(CompensableTerm::pair(p2, (**q).clone()));
            }
            for q2 in std_candidates(q) {
                out.push(CompensableTerm::pair((**p).clone(), q2));
            }
        }
        Seq(pp, qq) => rebuild(pp, qq, &mut out, &CompensableTerm::seq),
        Choice(pp, qq) => rebuild(pp, qq, &mut out, &CompensableTerm::choice),
        SyncPar(x, pp, qq) => {
            rebuild(pp, qq, &mut out, &|a, b| {
                CompensableTerm::par(x.clone(), a, b)
            });
            for e in x.iter() {
                out.push(CompensableTerm::par(
                    x.without(e),
                    (**pp).clone(),
                    (**qq).clone(),
                ));
            }
        }
    }
    out
}

/// Same-sort simplifications of `term`: operands in place of operators,
/// simplified operands, and sync sets with one member removed.
pub fn shrink_candidates(term: &Term) -> Vec<Term> {
    match term {
        Term::Standard(p) => std_candidates(p).into_iter().map(Term::Standard).collect(),
        Term::Compensable(pp) => comp_candidates(pp)
            .into_iter()
            .map(Term::Compensable)
            .collect(),
    }
}

/// Greedily replaces `term` by its smallest simplification that still fails
/// until none does.
pub fn shrink(term: &Term, fails: impl Fn(&Term) -> bool) -> Term {
    let mut current = term.clone();
    loop {
        let here = measure(&current);
        let mut candidates: Vec<Term> = shrink_candidates(&current)
            .into_iter()
            .filter(|c| measure(c) < here)
            .collect();
        candidates.sort_by_key(measure);
        candidates.dedup();
        match candidates.into_iter().find(|c| fails(c)) {
            Some(smaller) => current = smaller,
            None => return current,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub index: u64,
    pub original: Term,
    pub shrunk: Term,
    pub report: CheckReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CampaignSummary {
    pub passed: usize,
    pub failed: usize,
    pub engine_errors: usize,
    pub first_counterexample: Option<Counterexample>,
}

impl CampaignSummary {
    pub fn all_passed(&self) -> bool {
        self.failed == 0 && self.engine_errors == 0
    }
}

enum Outcome {
    Pass,
    Fail(Term),
    Error,
}

fn map_items<F>(count: u64, f: F) -> Vec<Outcome>
where
    F: Fn(u64) -> Outcome + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

fn summarise(
    outcomes: Vec<Outcome>,
    order: impl Fn(u64, &Term) -> (usize, u64),
    finish: impl Fn(u64, Term) -> Option<Counterexample>,
) -> CampaignSummary {
    let mut summary = CampaignSummary::default();
    let mut worst: Option<(u64, Term)> = None;
    for (index, outcome) in outcomes.into_iter().enumerate() {
        let index = index as u64;
        match outcome {
            Outcome::Pass => summary.passed += 1,
            Outcome::Error => summary.engine_errors += 1,
            Outcome::Fail(term) => {
                summary.failed += 1;
                let better = worst
                    .as_ref()
                    .is_none_or(|(i, t)| order(index, &term) < order(*i, t));
                if better {
                    worst = Some((index, term));
                }
            }
        }
    }
    summary.first_counterexample = worst.and_then(|(index, term)| finish(index, term));
    summary
}

fn theorem_fails(engine: &Engine, term: &Term) -> bool {
    matches!(check_theorem1(engine, term), Ok(report) if !report.holds)
}

fn campaign_term(cfg: &GenConfig, count: u64, index: u64) -> Term {
    let sort = if index < count {
        Sort::Standard
    } else {
        Sort::Compensable
    };
    generate_term(&cfg.for_item(index % count.max(1), sort as u64), sort)
}

/// The terms [`run_campaign`] checks, standard ones first.
pub fn campaign_terms(cfg: &GenConfig, count: u64) -> Vec<Term> {
    (0..2 * count)
        .map(|index| campaign_term(cfg, count, index))
        .collect()
}

/// Checks the correspondence on `count` generated terms of each sort.
///
/// Standard terms take campaign indices `0..count`, compensable terms
/// `count..2*count`. Among failures the smallest term (then lowest index)
/// is shrunk and reported.
pub fn run_campaign(engine: &Engine, cfg: &GenConfig, count: u64) -> CampaignSummary {
    let outcomes = map_items(2 * count, |index| {
        let term = campaign_term(cfg, count, index);
        match check_theorem1(engine, &term) {
            Ok(report) if report.holds => Outcome::Pass,
            Ok(_) => Outcome::Fail(term),
            Err(_) => Outcome::Error,
        }
    });
    summarise(
        outcomes,
        |index, term| (term.size(), index),
        |index, original| {
            let shrunk = shrink(&original, |t| theorem_fails(engine, t));
            let report = check_theorem1(engine, &shrunk).ok()?;
            Some(Counterexample {
                index,
                original,
                shrunk,
                report,
            })
        },
    )
}

/// Checks one lemma on `count` generated operand instances.
pub fn run_lemma_campaign(
    engine: &Engine,
    cfg: &GenConfig,
    count: u64,
    kind: LemmaKind,
) -> CampaignSummary {
    let instance_for =
        |index: u64| generate_lemma_instance(&cfg.for_item(index, 16 + kind as u64), kind);
    let outcomes = map_items(count, |index| {
        let instance = instance_for(index);
        match check_lemma(engine, &instance) {
            Ok(report) if report.holds => Outcome::Pass,
            Ok(report) => Outcome::Fail(report.term),
            Err(_) => Outcome::Error,
        }
    });
    summarise(
        outcomes,
        |index, term| (term.size(), index),
        |index, composite| {
            let report = check_lemma(engine, &instance_for(index)).ok()?;
            Some(Counterexample {
                index,
                original: composite.clone(),
                shrunk: composite,
                report,
            })
        },
    )
}
