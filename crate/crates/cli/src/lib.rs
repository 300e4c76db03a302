//! The `derivgraph` command line.
//!
//! Every subcommand prints a JSON report on stdout. Exit codes: 0 for
//! success, holds or entailed; 1 for refuted, not entailed or unknown;
//! 2 for usage, input and parse errors.

pub mod dot;
pub mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use derivgraph::analysis::{is_greedy, rule_dependency_graph};
use derivgraph::chase::{chase_levels, enumerate_derivations, Dedup, Derivation, EnumOptions};
use derivgraph::classify::{classify, entails, Class, ClassifyOptions, Entailment, Outcome, RederiveBound};
use derivgraph::gen::{GenConfig, KbGenerator};
use derivgraph::graph::build_derivation_graph;
use derivgraph::reduce::{reduce, ReductionOutcome, Strategy};
use derivgraph::syntax::{parse_document, RuleDocument};
use derivgraph::treedecomp::{extract_tree_decomposition, validate_tree_decomposition, width_bound};
use derivgraph::{Error, KnowledgeBase, Limits};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "derivgraph", version, about = "Derivation graphs, greediness and reductions for existential rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a rule file and print its normalized form.
    Parse { file: PathBuf },
    /// Compute the k-fold parallel chase.
    Chase {
        file: PathBuf,
        #[arg(long)]
        depth: usize,
    },
    /// List all derivations up to a length.
    Derivations {
        file: PathBuf,
        #[command(flatten)]
        enumeration: Enumeration,
    },
    /// Check whether derivations are greedy.
    GreedyCheck {
        file: PathBuf,
        #[arg(long, conflicts_with = "all", required_unless_present = "all")]
        derivation: Option<String>,
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        enumeration: Enumeration,
    },
    /// Print the graph of rule dependencies.
    Grd { file: PathBuf },
    /// Build the derivation graph of a derivation.
    Graph {
        file: PathBuf,
        #[command(flatten)]
        select: Select,
        /// Write the graph in DOT format to this file.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Reduce a derivation graph to a cycle-free one.
    Reduce {
        file: PathBuf,
        #[command(flatten)]
        select: Select,
        #[arg(long, value_enum, default_value = "full")]
        strategy: StrategyArg,
        /// Write the reduction trace as JSON to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write one DOT file per intermediate graph into this directory.
        #[arg(long)]
        dot_steps: Option<PathBuf>,
    },
    /// Reduce a derivation graph and extract a tree decomposition.
    Treedecomp {
        file: PathBuf,
        #[command(flatten)]
        select: Select,
        #[arg(long, value_enum, default_value = "full")]
        strategy: StrategyArg,
    },
    /// Check membership in a class up to a derivation depth.
    Classify {
        file: PathBuf,
        #[arg(long)]
        class: Class,
        #[arg(long)]
        depth: usize,
        #[arg(long, value_enum, default_value = "shortest")]
        rederive: RederiveArg,
    },
    /// Check whether a query maps into a chase level.
    Entail {
        file: PathBuf,
        #[arg(long)]
        query: String,
        #[arg(long)]
        depth: usize,
    },
    /// Compare greediness with reducibility on random knowledge bases.
    Fuzz {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        kbs: usize,
        #[arg(long, default_value_t = 3)]
        max_len: usize,
    },
}

#[derive(Args, Debug, Clone)]
struct Enumeration {
    #[arg(long, default_value_t = 4)]
    max_len: usize,
    #[arg(long, value_enum, default_value = "none")]
    dedup: DedupArg,
    /// Skip steps that add no new atom.
    #[arg(long)]
    skip_redundant: bool,
}

#[derive(Args, Debug, Clone)]
struct Select {
    /// Enumeration index, or the name of a derivation declared in the file.
    #[arg(long)]
    derivation: String,
    #[command(flatten)]
    enumeration: Enumeration,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum DedupArg {
    None,
    ModNulls,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum StrategyArg {
    CrOnly,
    Full,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum RederiveArg {
    Shortest,
    Depth,
}

impl Enumeration {
    fn options(&self) -> EnumOptions {
        let dedup = match self.dedup {
            DedupArg::None => Dedup::None,
            DedupArg::ModNulls => Dedup::ModNulls,
        };
        EnumOptions::new(self.max_len)
            .dedup(dedup)
            .skip_redundant(self.skip_redundant)
    }
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::CrOnly => Strategy::CrOnly,
            StrategyArg::Full => Strategy::Full,
        }
    }
}

/// A failed command: message for stderr and exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::ResourceLimit(_) => EXIT_NEGATIVE,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(Value, i32), Failure>;

/// Runs the command line `argv` (program name first), writing reports to
/// `out` and diagnostics to `err`. Returns the exit code.
pub fn run_cli_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok((report, code)) => {
            let text = serde_json::to_string_pretty(&report).expect("reports serialize");
            let _ = writeln!(out, "{text}");
            code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

pub fn run_cli<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    run_cli_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

fn load(path: &Path) -> Result<(RuleDocument, KnowledgeBase), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let doc = parse_document(&text).map_err(|e| Failure::usage(format!("{}:{e}", path.display())))?;
    let kb = doc.knowledge_base()?;
    Ok((doc, kb))
}

fn select(doc: &RuleDocument, kb: &KnowledgeBase, sel: &Select) -> Result<Derivation, Failure> {
    if let Some(script) = doc.derivation(&sel.derivation) {
        return Ok(script.resolve(kb)?);
    }
    let Ok(index) = sel.derivation.parse::<usize>() else {
        return Err(Failure::usage(format!("no derivation named {}", sel.derivation)));
    };
    let opts = sel.enumeration.options();
    match enumerate_derivations(kb.database(), kb.rules(), opts).nth(index) {
        Some(d) => Ok(d?),
        None => Err(Failure::usage(format!(
            "derivation index {index} out of range for --max-len {}",
            sel.enumeration.max_len
        ))),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn dispatch(cmd: Command) -> CmdResult {
    match cmd {
        Command::Parse { file } => cmd_parse(&file),
        Command::Chase { file, depth } => cmd_chase(&file, depth),
        Command::Derivations { file, enumeration } => cmd_derivations(&file, &enumeration),
        Command::GreedyCheck {
            file,
            derivation,
            all,
            enumeration,
        } => cmd_greedy(&file, derivation, all, enumeration),
        Command::Grd { file } => cmd_grd(&file),
        Command::Graph { file, select, dot } => cmd_graph(&file, &select, dot.as_deref()),
        Command::Reduce {
            file,
            select,
            strategy,
            trace,
            dot_steps,
        } => cmd_reduce(&file, &select, strategy.into(), trace.as_deref(), dot_steps.as_deref()),
        Command::Treedecomp {
            file,
            select,
            strategy,
        } => cmd_treedecomp(&file, &select, strategy.into()),
        Command::Classify {
            file,
            class,
            depth,
            rederive,
        } => cmd_classify(&file, class, depth, rederive),
        Command::Entail { file, query, depth } => cmd_entail(&file, &query, depth),
        Command::Fuzz { seed, kbs, max_len } => cmd_fuzz(seed, kbs, max_len),
    }
}

fn cmd_parse(file: &Path) -> CmdResult {
    let (doc, kb) = load(file)?;
    let rules: Vec<Value> = kb
        .rules()
        .iter()
        .map(|r| {
            json!({
                "id": r.id(),
                "frontier": r.frontier(),
                "existentials": r.existentials(),
            })
        })
        .collect();
    let body = json!({
        "facts": doc.facts.len(),
        "rules": rules,
        "queries": doc.queries.iter().map(|q| q.name.clone()).collect::<Vec<_>>(),
        "derivations": doc.derivations.iter().map(|d| d.name.clone()).collect::<Vec<_>>(),
        "document": doc.to_string(),
    });
    Ok((report::envelope("parse", body), EXIT_OK))
}

fn cmd_chase(file: &Path, depth: usize) -> CmdResult {
    let (_, kb) = load(file)?;
    let levels = chase_levels(kb.database(), kb.rules(), depth, &Limits::default())?;
    let sizes: Vec<usize> = levels.iter().map(|l| l.len()).collect();
    let body = json!({
        "depth": depth,
        "level_sizes": sizes,
        "instance": levels.last().unwrap(),
    });
    Ok((report::envelope("chase", body), EXIT_OK))
}

fn cmd_derivations(file: &Path, en: &Enumeration) -> CmdResult {
    let (_, kb) = load(file)?;
    let mut list = Vec::new();
    for (id, d) in enumerate_derivations(kb.database(), kb.rules(), en.options()).enumerate() {
        let d = d?;
        list.push(json!({ "id": id, "length": d.len(), "rules": d.rule_ids(kb.rules()) }));
    }
    let body = json!({ "max_len": en.max_len, "count": list.len(), "derivations": list });
    Ok((report::envelope("derivations", body), EXIT_OK))
}

fn cmd_greedy(file: &Path, derivation: Option<String>, all: bool, en: Enumeration) -> CmdResult {
    let (doc, kb) = load(file)?;
    let rules = kb.rules();
    let mut results = Vec::new();
    let mut all_greedy = true;
    let mut check = |id: Value, d: &Derivation| {
        let r = is_greedy(d, rules);
        all_greedy &= r.greedy;
        results.push(json!({
            "id": id,
            "rules": d.rule_ids(rules),
            "greedy": r.greedy,
            "first_violation": r.first_violation,
            "steps": r.steps,
        }));
    };
    if all {
        for (id, d) in enumerate_derivations(kb.database(), rules, en.options()).enumerate() {
            check(json!(id), &d?);
        }
    } else {
        let name = derivation.expect("clap requires one of the two");
        let sel = Select {
            derivation: name.clone(),
            enumeration: en,
        };
        let d = select(&doc, &kb, &sel)?;
        check(json!(name), &d);
    }
    let body = json!({ "greedy": all_greedy, "results": results });
    let code = if all_greedy { EXIT_OK } else { EXIT_NEGATIVE };
    Ok((report::envelope("greedy-check", body), code))
}

fn cmd_grd(file: &Path) -> CmdResult {
    let (_, kb) = load(file)?;
    let grd = rule_dependency_graph(kb.rules());
    let name = |i: usize| grd.rules[i].clone();
    let edges: Vec<Value> = grd.edges.iter().map(|&(a, b)| json!([name(a), name(b)])).collect();
    let body = json!({
        "rules": grd.rules,
        "edges": edges,
        "sources": grd.sources().into_iter().map(name).collect::<Vec<_>>(),
        "layers": grd.layers(),
    });
    Ok((report::envelope("grd", body), EXIT_OK))
}

fn cmd_graph(file: &Path, sel: &Select, dot_out: Option<&Path>) -> CmdResult {
    let (doc, kb) = load(file)?;
    let d = select(&doc, &kb, sel)?;
    let g = build_derivation_graph(&d, &kb);
    if let Some(path) = dot_out {
        write_file(path, &dot::to_dot(&g, &sel.derivation))?;
    }
    let body = json!({
        "derivation": report::derivation(&d, kb.rules()),
        "graph": report::graph(&g),
    });
    Ok((report::envelope("graph", body), EXIT_OK))
}

fn outcome_name(o: &ReductionOutcome) -> &'static str {
    match o {
        ReductionOutcome::Reduced(_) => "reduced",
        ReductionOutcome::Irreducible => "irreducible",
        ReductionOutcome::Unknown { .. } => "unknown",
    }
}

fn cmd_reduce(
    file: &Path,
    sel: &Select,
    strategy: Strategy,
    trace_out: Option<&Path>,
    dot_dir: Option<&Path>,
) -> CmdResult {
    let (doc, kb) = load(file)?;
    let d = select(&doc, &kb, sel)?;
    let g = build_derivation_graph(&d, &kb);
    let outcome = reduce(&g, strategy, &Limits::default());
    let mut body = json!({
        "strategy": strategy,
        "result": outcome_name(&outcome),
        "derivation": d.rule_ids(kb.rules()),
    });
    if let ReductionOutcome::Unknown { states } = outcome {
        body["states"] = json!(states);
    }
    if let Some(t) = outcome.trace() {
        body["trace"] = report::trace(t);
        let graphs = t.graphs()?;
        body["final_graph"] = report::graph(graphs.last().unwrap());
        if let Some(path) = trace_out {
            let full = json!({
                "schema": report::SCHEMA,
                "initial": report::graph(&t.initial),
                "steps": t.steps,
            });
            write_file(path, &serde_json::to_string_pretty(&full).unwrap())?;
        }
        if let Some(dir) = dot_dir {
            fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
            for (k, h) in graphs.iter().enumerate() {
                let name = format!("step_{k:03}");
                write_file(&dir.join(format!("{name}.dot")), &dot::to_dot(h, &name))?;
            }
        }
    }
    let code = if outcome.is_reduced() { EXIT_OK } else { EXIT_NEGATIVE };
    Ok((report::envelope("reduce", body), code))
}

fn cmd_treedecomp(file: &Path, sel: &Select, strategy: Strategy) -> CmdResult {
    let (doc, kb) = load(file)?;
    let d = select(&doc, &kb, sel)?;
    let g = build_derivation_graph(&d, &kb);
    let outcome = reduce(&g, strategy, &Limits::default());
    let Some(t) = outcome.trace() else {
        let body = json!({ "result": outcome_name(&outcome) });
        return Ok((report::envelope("treedecomp", body), EXIT_NEGATIVE));
    };
    let td = extract_tree_decomposition(&t.final_graph()?)?;
    let valid = validate_tree_decomposition(&td, d.final_instance());
    let body = json!({
        "result": "reduced",
        "trace": report::trace(t),
        "decomposition": td,
        "width": td.width(),
        "width_bound": width_bound(&kb),
        "valid": valid,
    });
    let code = if valid { EXIT_OK } else { EXIT_NEGATIVE };
    Ok((report::envelope("treedecomp", body), code))
}

fn cmd_classify(file: &Path, class: Class, depth: usize, rederive: RederiveArg) -> CmdResult {
    let (_, kb) = load(file)?;
    let mut opts = ClassifyOptions::new(depth);
    opts.rederive = match rederive {
        RederiveArg::Shortest => RederiveBound::Shortest,
        RederiveArg::Depth => RederiveBound::Depth,
    };
    let v = classify(&kb, class, &opts);
    let verified = v.verify(&kb, &opts.limits);
    let code = match v.outcome {
        Outcome::Holds => EXIT_OK,
        _ => EXIT_NEGATIVE,
    };
    Ok((report::envelope("classify", report::verdict(&v, kb.rules(), verified)), code))
}

fn cmd_entail(file: &Path, query: &str, depth: usize) -> CmdResult {
    let (doc, kb) = load(file)?;
    let q = doc
        .query(query)
        .ok_or_else(|| Failure::usage(format!("no query named {query}")))?;
    let e = entails(&kb, q, depth, &Limits::default())?;
    let code = match e {
        Entailment::Entailed { .. } => EXIT_OK,
        Entailment::Unknown => EXIT_NEGATIVE,
    };
    let body = json!({ "query": query, "depth": depth, "entailment": e });
    Ok((report::envelope("entail", body), code))
}

fn cmd_fuzz(seed: u64, kbs: usize, max_len: usize) -> CmdResult {
    let limits = Limits::default();
    let mut derivations = 0;
    let mut non_greedy = 0;
    let mut violations = Vec::new();
    for (x, kb) in KbGenerator::new(seed, GenConfig::default()).take(kbs).enumerate() {
        for d in enumerate_derivations(kb.database(), kb.rules(), EnumOptions::new(max_len)) {
            let d = d?;
            derivations += 1;
            let greedy = is_greedy(&d, kb.rules()).greedy;
            non_greedy += usize::from(!greedy);
            let g = build_derivation_graph(&d, &kb);
            let full = reduce(&g, Strategy::Full, &limits).is_reduced();
            let cr = reduce(&g, Strategy::CrOnly, &limits).is_reduced();
            if greedy != full || greedy != cr {
                violations.push(json!({
                    "kb": x,
                    "derivation": d.rule_ids(kb.rules()),
                    "greedy": greedy,
                    "full": full,
                    "cr_only": cr,
                }));
            }
        }
    }
    let code = if violations.is_empty() { EXIT_OK } else { EXIT_NEGATIVE };
    let body = json!({
        "seed": seed,
        "kbs": kbs,
        "max_len": max_len,
        "derivations": derivations,
        "non_greedy": non_greedy,
        "violations": violations,
    });
    Ok((report::envelope("fuzz", body), code))
}
