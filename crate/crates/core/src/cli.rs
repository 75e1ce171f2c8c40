//! Command-line driver.
//!
//! Exit codes: 0 success, 1 invalid input, 2 undefined combination,
//! 3 not a hypertree, 4 oracle mismatch.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::hypergraph::{
    construction_sequence, hypertree_cover, ConstructionSequence, Hyperedge, Hypergraph, VarSet,
    VariableId,
};
use crate::markov_tree::MarkovTree;
use crate::model::{parse_model, variables_record, Algebra, FactorRecord, Model, Record};
use crate::potential::Potential;
use crate::propagation::{brute_force_marginal, propagate_all, Firing, Schedule};
use crate::valuation::{Factorization, Valuation};
use crate::MassFunction;

/// Relative tolerance of the `--oracle` cross-check.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    InvalidInput = 1,
    Undefined = 2,
    NotHypertree = 3,
    OracleMismatch = 4,
}

#[derive(Debug, Parser)]
#[command(
    name = "locomp",
    version,
    about = "Marginals of factored valuations by local computation on hypertrees"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report whether the factor domains form a hypertree.
    Check { model: PathBuf },
    /// Compute marginals by message passing on a Markov tree.
    Marginals(MarginalsArgs),
    /// Compute a hypertree cover of the factor domains.
    Cover { model: PathBuf },
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("selection").required(true).args(["target", "all"])))]
struct MarginalsArgs {
    model: PathBuf,
    /// Comma-separated variables contained in some hyperedge of the tree.
    #[arg(long)]
    target: Option<String>,
    /// Emit the marginal of every hyperedge of the tree.
    #[arg(long)]
    all: bool,
    /// Replace the factor hypergraph by a hypertree cover first.
    #[arg(long)]
    cover: bool,
    /// Scale potential marginals to sum to one.
    #[arg(long)]
    normalize: bool,
    /// Recompute every marginal by brute force and fail on mismatch.
    #[arg(long)]
    oracle: bool,
    /// Write the Markov tree as JSON.
    #[arg(long, value_name = "PATH")]
    tree_out: Option<PathBuf>,
    /// Write the rule-firing trace as JSON.
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
}

struct Failure {
    code: ExitCode,
    message: String,
}

impl Failure {
    fn new(code: ExitCode, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_undefined_combination() {
            ExitCode::Undefined
        } else {
            ExitCode::InvalidInput
        };
        Failure::new(code, e.to_string())
    }
}

/// Parses `args` (program name first), runs the command, and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() {
                ExitCode::InvalidInput as i32
            } else {
                0
            };
        }
    };
    let result = match cli.command {
        Command::Check { model } => cmd_check(&model),
        Command::Marginals(args) => cmd_marginals(&args),
        Command::Cover { model } => cmd_cover(&model),
    };
    match result {
        Ok((code, out)) => {
            let _ = stdout.write_all(out.as_bytes());
            code as i32
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code as i32
        }
    }
}

fn load(path: &Path) -> Result<Model, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Failure::new(
            ExitCode::InvalidInput,
            format!("cannot read {}: {e}", path.display()),
        )
    })?;
    parse_model(&text)
        .map_err(|e| Failure::new(ExitCode::InvalidInput, format!("{}: {e}", path.display())))
}

fn hypergraph_of(model: &Model) -> &Hypergraph {
    match model {
        Model::Potential(f) => f.hypergraph(),
        Model::Belief(f) => f.hypergraph(),
    }
}

fn names(vars: &VarSet) -> Vec<&str> {
    vars.iter().map(VariableId::as_str).collect()
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn cmd_check(path: &Path) -> Result<(ExitCode, String), Failure> {
    let model = load(path)?;
    let graph = hypergraph_of(&model);
    let mut out = String::new();
    let yes_no = |b: bool| if b { "yes" } else { "no" };
    writeln!(out, "hyperedges: {graph}").unwrap();
    writeln!(out, "connected: {}", yes_no(graph.is_connected())).unwrap();
    let seq = construction_sequence(graph, None)?;
    writeln!(out, "hypertree: {}", yes_no(seq.is_some())).unwrap();
    match seq {
        Some(seq) => {
            writeln!(out, "construction sequence:").unwrap();
            for step in seq.steps() {
                match &step.branch {
                    Some(b) => writeln!(out, "  {} branch {b}", step.hyperedge).unwrap(),
                    None => writeln!(out, "  {}", step.hyperedge).unwrap(),
                }
            }
            Ok((ExitCode::Success, out))
        }
        None => Ok((ExitCode::NotHypertree, out)),
    }
}

fn sequence_json(seq: &ConstructionSequence) -> Value {
    Value::Array(
        seq.steps()
            .iter()
            .map(|s| {
                json!({
                    "hyperedge": names(s.hyperedge.vars()),
                    "branch": s.branch.as_ref().map(|b| names(b.vars())),
                })
            })
            .collect(),
    )
}

fn cmd_cover(path: &Path) -> Result<(ExitCode, String), Failure> {
    let model = load(path)?;
    let components = hypergraph_of(&model)
        .components()
        .iter()
        .map(|c| {
            let (cover, seq) = hypertree_cover(c)?;
            Ok(json!({
                "cover": cover.edges().map(|e| names(e.vars())).collect::<Vec<_>>(),
                "sequence": sequence_json(&seq),
                "max_size": cover.max_edge_size(),
            }))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok((
        ExitCode::Success,
        to_json(&json!({ "components": components })),
    ))
}

fn tree_json(tree: &MarkovTree) -> Value {
    json!({
        "vertices": tree.vertices().iter().map(|v| names(v.vars())).collect::<Vec<_>>(),
        "edges": tree.edges().map(|(a, b)| [a, b]).collect::<Vec<_>>(),
        "separators": tree.separators().values().map(names).collect::<Vec<_>>(),
    })
}

fn firing_json(tree: &MarkovTree, firing: &Firing) -> Value {
    match firing {
        Firing::Message { from, to, domain } => json!({
            "rule": 1,
            "from": names(tree.vertex(*from).vars()),
            "to": names(tree.vertex(*to).vars()),
            "domain": names(domain),
        }),
        Firing::Marginal { vertex, domain } => json!({
            "rule": 2,
            "vertex": names(tree.vertex(*vertex).vars()),
            "domain": names(domain),
        }),
    }
}

trait Emit: Record {
    fn for_output(&self, normalize: bool) -> Self;
}

impl Emit for Potential {
    fn for_output(&self, normalize: bool) -> Self {
        if normalize {
            self.normalize()
        } else {
            self.clone()
        }
    }
}

impl Emit for MassFunction {
    fn for_output(&self, _normalize: bool) -> Self {
        self.clone()
    }
}

/// One connected part of the model with its Markov tree and marginals.
struct Solved<V> {
    factors: Factorization<V>,
    tree: MarkovTree,
    marginals: Vec<V>,
    trace: Vec<Firing>,
}

fn solve<V: Valuation>(f: &Factorization<V>, cover: bool) -> Result<Vec<Solved<V>>, Failure> {
    let graph = f.hypergraph();
    let parts: Vec<(Factorization<V>, ConstructionSequence)> = if cover {
        graph
            .components()
            .iter()
            .map(|c| {
                let part = f.restrict(c)?;
                let (cover, _) = hypertree_cover(c)?;
                let assigned = part.assign_to_cover(&cover)?;
                let seq = construction_sequence(&cover, None)?.expect("covers are hypertrees");
                Ok((assigned, seq))
            })
            .collect::<Result<_, Error>>()?
    } else {
        match construction_sequence(graph, None)? {
            Some(seq) => vec![(f.clone(), seq)],
            None => {
                return Err(Failure::new(
                    ExitCode::NotHypertree,
                    format!("factor domains {graph} do not form a hypertree; use --cover"),
                ))
            }
        }
    };
    parts
        .into_iter()
        .map(|(factors, seq)| {
            let tree = MarkovTree::from_construction_sequence(&seq)?;
            let run = propagate_all(&factors, &tree, Schedule::Fifo)?;
            Ok(Solved {
                factors,
                tree,
                marginals: run.marginals,
                trace: run.trace,
            })
        })
        .collect::<Result<_, Error>>()
        .map_err(Failure::from)
}

fn parse_target(spec: &str) -> Result<VarSet, Failure> {
    spec.split(',')
        .map(|s| VariableId::new(s.trim()))
        .collect::<Result<VarSet, _>>()
        .and_then(|v| Hyperedge::new(v).map(Hyperedge::into_vars))
        .map_err(|e| Failure::new(ExitCode::InvalidInput, format!("--target: {e}")))
}

fn marginals_for<V: Emit>(
    f: &Factorization<V>,
    algebra: Algebra,
    args: &MarginalsArgs,
) -> Result<(ExitCode, String), Failure> {
    let solved = solve(f, args.cover)?;

    // (component, marginal) pairs, before any output scaling
    let mut picked: Vec<(usize, V)> = Vec::new();
    match &args.target {
        Some(spec) => {
            let target = parse_target(spec)?;
            let hit = solved.iter().enumerate().find_map(|(c, s)| {
                s.tree
                    .vertices()
                    .iter()
                    .zip(&s.marginals)
                    .filter(|(h, _)| target.is_subset(h.vars()))
                    .min_by(|a, b| a.0.cmp(b.0))
                    .map(|(_, m)| (c, m))
            });
            let (c, m) = hit.ok_or_else(|| {
                Failure::new(
                    ExitCode::InvalidInput,
                    format!("--target {spec} is not contained in any hyperedge of the tree"),
                )
            })?;
            picked.push((c, m.marginalize(&target)?));
        }
        None => {
            for (c, s) in solved.iter().enumerate() {
                picked.extend(s.marginals.iter().cloned().map(|m| (c, m)));
            }
        }
    }
    picked.sort_by_key(|(_, m)| m.domain());

    if args.oracle {
        for (c, m) in &picked {
            let oracle = brute_force_marginal(&solved[*c].factors, &m.domain())?;
            against_oracle(m, &oracle)?;
        }
    }

    if let Some(path) = &args.tree_out {
        let value = match solved.as_slice() {
            [one] => tree_json(&one.tree),
            many => Value::Array(many.iter().map(|s| tree_json(&s.tree)).collect()),
        };
        write_file(path, &to_json(&value))?;
    }
    if let Some(path) = &args.trace {
        let firings: Vec<Value> = solved
            .iter()
            .flat_map(|s| s.trace.iter().map(|t| firing_json(&s.tree, t)))
            .collect();
        write_file(path, &to_json(&firings))?;
    }

    let records: Vec<FactorRecord> = picked
        .iter()
        .map(|(_, m)| m.for_output(args.normalize).to_record())
        .collect();
    let out = json!({
        "algebra": algebra,
        "variables": variables_record(f.frames()),
        "marginals": records,
    });
    Ok((ExitCode::Success, to_json(&out)))
}

fn against_oracle<V: Valuation>(marginal: &V, oracle: &V) -> Result<(), Failure> {
    if marginal.approx_eq(oracle, ORACLE_TOLERANCE) {
        return Ok(());
    }
    Err(Failure::new(
        ExitCode::OracleMismatch,
        format!(
            "marginal on {{{}}} differs from brute force",
            names(&marginal.domain()).join(",")
        ),
    ))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| {
        Failure::new(
            ExitCode::InvalidInput,
            format!("cannot write {}: {e}", path.display()),
        )
    })
}

fn cmd_marginals(args: &MarginalsArgs) -> Result<(ExitCode, String), Failure> {
    match load(&args.model)? {
        Model::Potential(f) => marginals_for(&f, Algebra::Potential, args),
        Model::Belief(f) => marginals_for(&f, Algebra::Belief, args),
    }
}
