use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use kgqa::entitylink::DEFAULT_LINK_THRESHOLD;
use kgqa::evalkit::{load_dataset, run_dataset};
use kgqa::kbstore::parse_document;
use kgqa::pipeline::{render_answers, render_explain, render_paths, Engine, PipelineConfig, QuestionInput, Status};
use kgqa::traversal::{RankerConfig, DEFAULT_BEAM, DEFAULT_MAX_K, DEFAULT_TAU};
use kgqa::{Gazetteer, KnowledgeBase, Settings, SimilarityLexicon};

#[derive(Parser)]
#[command(name = "kgqa", version, about = "Answer questions over an RDF knowledge base")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Answer one question, or question/tree line pairs from stdin when no question is given.
    Ask {
        question: Option<String>,
        /// Bracketed constituent tree of the question.
        #[arg(long, requires = "question")]
        tree: Option<String>,
        /// Print the full trace instead of the answers.
        #[arg(long)]
        explain: bool,
        #[command(flatten)]
        resources: ResourceArgs,
    },
    /// Score a dataset and print the report table.
    Eval {
        #[arg(long)]
        dataset: PathBuf,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        resources: ResourceArgs,
    },
    /// Print explanation traces for dataset questions.
    Explain {
        #[arg(long)]
        dataset: PathBuf,
        /// Only this question.
        #[arg(long)]
        id: Option<String>,
        #[command(flatten)]
        resources: ResourceArgs,
    },
}

#[derive(Args)]
struct ResourceArgs {
    /// N-Triples file; repeat to merge several.
    #[arg(long, required = true)]
    kb: Vec<PathBuf>,
    #[arg(long)]
    gazetteer: PathBuf,
    #[arg(long)]
    lexicon: PathBuf,
    /// TOML file with prefixes, class map and excluded predicates.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_LINK_THRESHOLD)]
    link_threshold: f64,
    /// Minimal per-step predicate score.
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: f64,
    /// Candidate predicates kept per step.
    #[arg(long, default_value_t = DEFAULT_BEAM)]
    beam: usize,
    /// Largest hop count a structure may need.
    #[arg(long, default_value_t = DEFAULT_MAX_K)]
    max_k: usize,
    /// Honour subject/object roles implied by the question instead of walking edges both ways.
    #[arg(long)]
    respect_direction: bool,
    /// Repeat for more detail.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

/// Failures that are the caller's fault and exit with status 1.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn load_kb(paths: &[PathBuf]) -> Result<KnowledgeBase> {
    let mut triples = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        triples.extend(parse_document(&text).with_context(|| format!("parsing {}", path.display()))?);
    }
    Ok(KnowledgeBase::from_triples(triples))
}

impl ResourceArgs {
    fn pipeline_config(&self, settings: &Settings) -> Result<PipelineConfig> {
        if !(0.0..=1.0).contains(&self.link_threshold) {
            return Err(usage(format!("--link-threshold {} outside [0, 1]", self.link_threshold)));
        }
        if !(1..=2).contains(&self.max_k) {
            return Err(usage(format!("--max-k {} outside 1..=2", self.max_k)));
        }
        let ranker = RankerConfig {
            tau: self.tau,
            beam: self.beam,
            max_k: self.max_k,
            respect_direction: self.respect_direction,
            excluded_predicates: settings.excluded_predicates.clone(),
            classes: settings.classes.clone(),
        };
        ranker.validate().map_err(|e| usage(e.to_string()))?;
        Ok(PipelineConfig { link_threshold: self.link_threshold, ranker })
    }

    fn engine(&self) -> Result<Engine> {
        let settings = match &self.config {
            Some(p) => Settings::load(p)?,
            None => Settings::default(),
        };
        let config = self.pipeline_config(&settings)?;
        let kb = load_kb(&self.kb)?;
        let gazetteer = Gazetteer::load(&self.gazetteer, &settings.prefixes)?;
        let lexicon = SimilarityLexicon::load(&self.lexicon)?;
        if self.verbose > 0 {
            eprintln!(
                "loaded {} triples, {} surface forms, {} similarity pairs",
                kb.len(),
                gazetteer.len(),
                lexicon.len()
            );
        }
        Ok(Engine { kb, gazetteer, lexicon, prefixes: settings.prefixes, config })
    }
}

fn print_trace(out: &mut impl Write, engine: &Engine, q: &QuestionInput, explain: bool, verbose: u8) -> Result<()> {
    let trace = engine.answer(q);
    if explain {
        write!(out, "{}", render_explain(&trace, &engine.prefixes))?;
        return Ok(());
    }
    match &trace.status {
        Status::Answered => writeln!(out, "{}", render_answers(&trace, &engine.prefixes))?,
        Status::Unprocessed { stage, reason } => writeln!(out, "unprocessed: {stage}: {reason}")?,
    }
    if verbose > 0 && !trace.paths.is_empty() {
        let limit = if verbose > 1 { usize::MAX } else { 10 };
        write!(out, "{}", render_paths(&trace, &engine.prefixes, limit))?;
    }
    Ok(())
}

fn ask(question: Option<String>, tree: Option<String>, explain: bool, resources: &ResourceArgs) -> Result<()> {
    let engine = resources.engine()?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if let Some(question) = question {
        let Some(tree) = tree else {
            return Err(usage("--tree is required with a question"));
        };
        let q = QuestionInput { id: "q".into(), question, tree, gold: None };
        return print_trace(&mut out, &engine, &q, explain, resources.verbose);
    }
    // REPL: a question line followed by its tree line
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    let mut n = 0;
    while let Some(question) = lines.next().transpose()? {
        if question.trim().is_empty() {
            continue;
        }
        let Some(tree) = lines.next().transpose()? else {
            bail!("question `{question}` has no tree line");
        };
        n += 1;
        let q = QuestionInput { id: n.to_string(), question, tree, gold: None };
        print_trace(&mut out, &engine, &q, explain, resources.verbose)?;
        out.flush()?;
    }
    Ok(())
}

fn eval(dataset: &Path, jobs: usize, resources: &ResourceArgs) -> Result<()> {
    let engine = resources.engine()?;
    let questions = load_dataset(dataset, &engine.prefixes)?;
    let report = run_dataset(&engine, &questions, jobs)?;
    print!("{}", report.render());
    Ok(())
}

fn explain(dataset: &Path, id: Option<&str>, resources: &ResourceArgs) -> Result<()> {
    let engine = resources.engine()?;
    let mut questions = load_dataset(dataset, &engine.prefixes)?;
    if let Some(id) = id {
        questions.retain(|q| q.id == id);
        if questions.is_empty() {
            bail!("no question with id {id}");
        }
    }
    questions.sort_by(|a, b| a.id.cmp(&b.id));
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for (i, q) in questions.iter().enumerate() {
        if i > 0 {
            writeln!(out)?;
        }
        print_trace(&mut out, &engine, q, true, resources.verbose)?;
    }
    Ok(())
}

/// The error chain joined by ": ", skipping causes a parent message already quotes.
fn describe(e: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if msg.ends_with(&text) {
            continue;
        }
        if !msg.is_empty() {
            msg.push_str(": ");
        }
        msg.push_str(&text);
    }
    msg
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Ask { question, tree, explain, resources } => ask(question.clone(), tree.clone(), *explain, resources),
        Command::Eval { dataset, jobs, resources } => eval(dataset, *jobs, resources),
        Command::Explain { dataset, id, resources } => explain(dataset, id.as_deref(), resources),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            if e.is::<UsageError>() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
