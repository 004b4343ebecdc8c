//! Command-line front end.
//!
//! Results go to stdout as one JSON document per run (or DOT / plain text
//! on request), diagnostics to stderr. Exit codes: 0 for a decisive answer,
//! 2 for an undecided or not-found-within-bound answer, 1 for any error.

use std::ffi::OsString;
use std::io::{Read, Write};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::abelian::{abelian_retract_obstruction, exponent_vector, smith_normal_form, AbelianVerdict, IntMatrix};
use crate::closure::{
    is_retract_with, is_verbally_closed_with, vcl_with, ClosureStatus, RetractVerdict,
};
use crate::equations::{solve_in_subgroup, CoefficientSystem, SearchLimits, SolveOutcome, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::nilpotent::{FreeNilpotentGroup, NilElement, WidthOutcome, DEFAULT_WIDTH_BUDGET};
use crate::stallings::{SubgroupGraph, DEFAULT_FRINGE_LIMIT};
use crate::words::Word;

#[derive(Parser, Debug)]
#[command(name = "vclosure", version, about = "Retracts, verbal closures and equations in free groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Args, Debug)]
struct Subgroup {
    /// Rank of the ambient free group (letters a..z, inverses A..Z).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=26))]
    rank: u8,
    /// Comma-separated generator words; `-` reads them from stdin.
    #[arg(long, allow_hyphen_values = true)]
    gens: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct Search {
    /// Length bound for searched words.
    #[arg(long, default_value_t = 4)]
    bound: usize,
    /// Cap on visited search states.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Folded subgroup graph.
    Fold(Subgroup),
    /// Membership of a word.
    Member {
        #[command(flatten)]
        subgroup: Subgroup,
        #[arg(long)]
        word: String,
    },
    /// Free basis read off a spanning tree.
    Basis(Subgroup),
    /// Intersection with a second subgroup.
    Intersect {
        #[command(flatten)]
        subgroup: Subgroup,
        /// Generators of the second subgroup.
        #[arg(long = "with")]
        other: String,
    },
    /// All folded quotients of the subgroup graph.
    Fringe {
        #[command(flatten)]
        subgroup: Subgroup,
        #[arg(long, default_value_t = DEFAULT_FRINGE_LIMIT)]
        vertex_limit: usize,
    },
    /// Exponent vectors, invariant factors and the abelian retract test.
    Abelianize(Subgroup),
    /// Is the subgroup a retract?
    IsRetract {
        #[command(flatten)]
        subgroup: Subgroup,
        #[command(flatten)]
        search: Search,
    },
    /// Is the subgroup verbally closed?
    IsVerballyClosed {
        #[command(flatten)]
        subgroup: Subgroup,
        #[command(flatten)]
        search: Search,
    },
    /// Smallest retract containing the subgroup.
    Vcl {
        #[command(flatten)]
        subgroup: Subgroup,
        #[command(flatten)]
        search: Search,
        #[arg(long, default_value_t = DEFAULT_FRINGE_LIMIT)]
        vertex_limit: usize,
    },
    /// Solve a system of equations, optionally over a subgroup.
    Solve {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=26))]
        rank: u8,
        /// JSON `{"vars": n, "eqs": [{"lhs": "x1 x2 X1", "rhs": "abA"}]}`, inline or a file path.
        #[arg(long)]
        system: String,
        /// Generators of the subgroup the variables range over (default: the whole group).
        #[arg(long, allow_hyphen_values = true)]
        gens: Option<String>,
        #[command(flatten)]
        search: Search,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Free nilpotent groups.
    #[command(subcommand)]
    Nilpotent(NilCommand),
}

#[derive(Args, Debug)]
struct NilGroup {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=26))]
    rank: u8,
    #[arg(long)]
    class: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum NilCommand {
    /// Mal'cev normal form of a word.
    Collect {
        #[command(flatten)]
        group: NilGroup,
        #[arg(long)]
        word: String,
    },
    /// Bounded search for a product of commutators.
    Width {
        #[command(flatten)]
        group: NilGroup,
        /// Element as a word.
        #[arg(long, conflicts_with = "exps")]
        word: Option<String>,
        /// Element as comma-separated Mal'cev coordinates.
        #[arg(long, allow_hyphen_values = true)]
        exps: Option<String>,
        /// Number of commutators.
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Coordinate bound for the operands.
        #[arg(long, default_value_t = 3)]
        bound: i64,
        /// Search the form [g_1, z_1] ... [g_r, z_r] instead.
        #[arg(long)]
        form: bool,
        #[arg(long, default_value_t = DEFAULT_WIDTH_BUDGET)]
        budget: u64,
    },
}

/// Outcome of one command: a document and whether the answer was decisive.
struct Output {
    body: Value,
    graph: Option<SubgroupGraph>,
    decisive: bool,
}

impl Output {
    fn decisive(body: Value) -> Output {
        Output {
            body,
            graph: None,
            decisive: true,
        }
    }

    fn with_graph(body: Value, graph: SubgroupGraph) -> Output {
        Output {
            body,
            graph: Some(graph),
            decisive: true,
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
            } else {
                let _ = write!(stdout, "{rendered}");
            }
            return code;
        }
    };
    let format = cli.command.format();
    match execute(cli.command, stdin) {
        Ok(out) => match render(&out, format) {
            Ok(text) => {
                let _ = writeln!(stdout, "{text}");
                if out.decisive {
                    0
                } else {
                    2
                }
            }
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                1
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

impl Command {
    fn format(&self) -> Format {
        match self {
            Command::Fold(s) | Command::Basis(s) | Command::Abelianize(s) => s.format,
            Command::Member { subgroup, .. }
            | Command::Intersect { subgroup, .. }
            | Command::Fringe { subgroup, .. }
            | Command::IsRetract { subgroup, .. }
            | Command::IsVerballyClosed { subgroup, .. }
            | Command::Vcl { subgroup, .. } => subgroup.format,
            Command::Solve { format, .. } => *format,
            Command::Nilpotent(NilCommand::Collect { group, .. } | NilCommand::Width { group, .. }) => group.format,
        }
    }
}

fn render(out: &Output, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(out.body.to_string()),
        Format::Dot => match &out.graph {
            Some(g) => Ok(g.to_dot().trim_end().to_string()),
            None => Err(Error::InvalidArgument("DOT output is only available for commands that return a subgroup".into())),
        },
        Format::Text => Ok(text(&out.body)),
    }
}

fn text(body: &Value) -> String {
    match body {
        Value::Object(map) => map
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k}: {s}"),
                other => format!("{k}: {other}"),
            })
            .collect::<Vec<_>>()
            .join("\n"),
        other => other.to_string(),
    }
}

fn read_gens(spec: &str, stdin: &mut dyn Read) -> Result<Vec<String>> {
    let raw = if spec == "-" {
        let mut buf = String::new();
        stdin
            .read_to_string(&mut buf)
            .map_err(|e| Error::InvalidArgument(format!("reading stdin: {e}")))?;
        buf.replace(['\n', '\r'], ",")
    } else {
        spec.to_string()
    };
    let parts: Vec<String> = raw.split(',').map(|s| s.trim().to_string()).collect();
    if parts.len() > 1 {
        Ok(parts.into_iter().filter(|s| !s.is_empty()).collect())
    } else {
        Ok(parts)
    }
}

fn subgroup(s: &Subgroup, stdin: &mut dyn Read) -> Result<SubgroupGraph> {
    let gens = read_gens(&s.gens, stdin)?;
    let words = gens
        .iter()
        .map(|g| Word::parse(g, s.rank as usize))
        .collect::<Result<Vec<_>>>()?;
    SubgroupGraph::fold(&words, s.rank as usize)
}

fn basis_json(g: &SubgroupGraph) -> Value {
    json!(g.basis().generators.iter().map(|w| w.to_string()).collect::<Vec<_>>())
}

fn verdict_output(verdict: &RetractVerdict, bound: usize) -> (Value, bool) {
    (verdict.to_json(bound), verdict.is_decisive())
}

fn execute(command: Command, stdin: &mut dyn Read) -> Result<Output> {
    match command {
        Command::Fold(s) => {
            let g = subgroup(&s, stdin)?;
            let body = serde_json::to_value(g.to_json()).expect("serializable");
            Ok(Output::with_graph(body, g))
        }
        Command::Member { subgroup: s, word } => {
            let g = subgroup(&s, stdin)?;
            let w = Word::parse(&word, s.rank as usize)?;
            Ok(Output::decisive(json!({"member": g.contains(&w)})))
        }
        Command::Basis(s) => {
            let g = subgroup(&s, stdin)?;
            let body = json!({"basis": basis_json(&g), "rank": g.rank()});
            Ok(Output::with_graph(body, g))
        }
        Command::Intersect { subgroup: s, other } => {
            let g = subgroup(&s, stdin)?;
            let h = subgroup(
                &Subgroup {
                    rank: s.rank,
                    gens: other,
                    format: s.format,
                },
                stdin,
            )?;
            let k = g.intersect(&h)?;
            let body = json!({"basis": basis_json(&k), "rank": k.rank()});
            Ok(Output::with_graph(body, k))
        }
        Command::Fringe { subgroup: s, vertex_limit } => {
            let g = subgroup(&s, stdin)?;
            let fringe = g.fringe(vertex_limit)?;
            let members: Vec<Value> = fringe.iter().map(basis_json).collect();
            Ok(Output::decisive(json!({"count": members.len(), "fringe": members})))
        }
        Command::Abelianize(s) => {
            let g = subgroup(&s, stdin)?;
            let r = s.rank as usize;
            let vectors: Vec<_> = g.basis().generators.iter().map(exponent_vector).collect();
            let snf = smith_normal_form(&IntMatrix::from_columns(&vectors, r));
            let test = match abelian_retract_obstruction(&vectors, r) {
                AbelianVerdict::Passes { witness } => json!({"passes": true, "witness": witness}),
                AbelianVerdict::Obstructed(o) => json!({"passes": false, "obstruction": o}),
            };
            Ok(Output::decisive(json!({
                "vectors": vectors,
                "invariant_factors": snf.factors,
                "retract_test": test,
            })))
        }
        Command::IsRetract { subgroup: s, search } => {
            let g = subgroup(&s, stdin)?;
            let verdict = is_retract_with(&g, SearchLimits::new(search.bound).with_budget(search.budget))?;
            let (body, decisive) = verdict_output(&verdict, search.bound);
            Ok(Output {
                body,
                graph: None,
                decisive,
            })
        }
        Command::IsVerballyClosed { subgroup: s, search } => {
            let g = subgroup(&s, stdin)?;
            let report = is_verbally_closed_with(&g, SearchLimits::new(search.bound).with_budget(search.budget))?;
            let (mut body, decisive) = verdict_output(&report.verdict, search.bound);
            if let Some(eq) = &report.falsifying_equation {
                body["falsifying_equation"] = eq.to_json();
            }
            Ok(Output {
                body,
                graph: None,
                decisive,
            })
        }
        Command::Vcl {
            subgroup: s,
            search,
            vertex_limit,
        } => {
            let g = subgroup(&s, stdin)?;
            let result = vcl_with(&g, SearchLimits::new(search.bound).with_budget(search.budget), vertex_limit)?;
            let mut body = json!({
                "closure": basis_json(&result.closure),
                "status": result.status,
            });
            let decisive = result.status == ClosureStatus::Exact;
            if !decisive {
                body["undecided"] = json!(result.undecided.iter().map(basis_json).collect::<Vec<_>>());
                body["alternatives"] = json!(result.alternatives.iter().map(basis_json).collect::<Vec<_>>());
            }
            Ok(Output {
                body,
                graph: Some(result.closure),
                decisive,
            })
        }
        Command::Solve {
            rank,
            system,
            gens,
            search,
            ..
        } => {
            let r = rank as usize;
            let text = if system.trim_start().starts_with('{') {
                system
            } else {
                std::fs::read_to_string(&system)
                    .map_err(|e| Error::InvalidArgument(format!("cannot read {system}: {e}")))?
            };
            let system = CoefficientSystem::from_json(&text, r)?;
            let domain = match gens {
                Some(spec) => subgroup(
                    &Subgroup {
                        rank,
                        gens: spec,
                        format: Format::Json,
                    },
                    stdin,
                )?,
                None => SubgroupGraph::full(r),
            };
            let limits = SearchLimits::new(search.bound).with_budget(search.budget);
            Ok(match solve_in_subgroup(&system, &domain, limits)? {
                SolveOutcome::Found(solution) => {
                    let assignment: serde_json::Map<String, Value> = solution
                        .assignment
                        .images()
                        .iter()
                        .enumerate()
                        .map(|(i, w)| (format!("x{}", i + 1), json!(w.to_string())))
                        .collect();
                    Output::decisive(json!({
                        "result": "found",
                        "assignment": assignment,
                        "states_explored": solution.states_explored,
                    }))
                }
                SolveOutcome::NotFoundUpToBound { bound, states_explored } => Output {
                    body: json!({
                        "result": "not-found-up-to-bound",
                        "bound": bound,
                        "states_explored": states_explored,
                    }),
                    graph: None,
                    decisive: false,
                },
            })
        }
        Command::Nilpotent(cmd) => nilpotent(cmd),
    }
}

fn element_json(n: &FreeNilpotentGroup, x: &NilElement) -> Value {
    let mut v = serde_json::to_value(n.to_json(x)).expect("serializable");
    v["normal_form"] = json!(n.format(x));
    v
}

fn nilpotent(cmd: NilCommand) -> Result<Output> {
    match cmd {
        NilCommand::Collect { group, word } => {
            let n = FreeNilpotentGroup::new(group.rank as usize, group.class)?;
            let x = n.collect(&Word::parse(&word, group.rank as usize)?)?;
            Ok(Output::decisive(element_json(&n, &x)))
        }
        NilCommand::Width {
            group,
            word,
            exps,
            k,
            bound,
            form,
            budget,
        } => {
            let n = FreeNilpotentGroup::new(group.rank as usize, group.class)?;
            let g = match (word, exps) {
                (Some(w), None) => n.collect(&Word::parse(&w, group.rank as usize)?)?,
                (None, Some(e)) => {
                    let coords = e
                        .split(',')
                        .enumerate()
                        .map(|(i, s)| {
                            s.trim().parse::<i64>().map_err(|err| Error::Parse {
                                position: i,
                                message: format!("coordinate {s:?}: {err}"),
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    n.element(coords)?
                }
                _ => return Err(Error::InvalidArgument("give exactly one of --word and --exps".into())),
            };
            if form {
                let found = n.verify_commutator_form(&g, bound, budget)?;
                let decisive = found.is_some();
                let body = json!({
                    "element": element_json(&n, &g),
                    "outcome": if decisive { "representable" } else { "not-representable-within-bound" },
                    "factors": found.unwrap_or_default().iter().map(|x| element_json(&n, x)).collect::<Vec<_>>(),
                    "bound": bound,
                });
                return Ok(Output {
                    body,
                    graph: None,
                    decisive,
                });
            }
            let report = n.commutator_width_bounded(&g, k, bound, budget)?;
            let decisive = report.outcome == WidthOutcome::Representable;
            let factors: Vec<Value> = report
                .factors
                .iter()
                .map(|(x, y)| json!([element_json(&n, x), element_json(&n, y)]))
                .collect();
            Ok(Output {
                body: json!({
                    "element": element_json(&n, &g),
                    "k": k,
                    "outcome": report.outcome,
                    "factors": factors,
                    "bound": bound,
                }),
                graph: None,
                decisive,
            })
        }
    }
}
