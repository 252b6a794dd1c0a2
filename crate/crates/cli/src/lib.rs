//! Command-line frontend: argument parsing, command dispatch and output formatting.
//!
//! [`run`] never touches the process itself; it returns the exit code and both
//! output streams so it can be driven from tests.

pub mod catalog;
pub mod verify;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use mcde_core::{
    dedup_by_symmetry, derive_identity, differentiate, hierarchy, is_closed, parse_expr,
    parse_spec_source, saturate_conditions, search_closed, Expression, IndexCoherence, LabelId,
    Mode, Monomial, RuleSet, SearchBounds, SpecSource,
};
use serde_json::{json, Value};

use crate::catalog::CatalogDoc;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "mcde",
    version,
    about = "Differential identities and closed products in multi-index complexes"
)]
pub struct Cli {
    /// Rule system file.
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Worker threads for search; 0 picks the number of cores.
    #[arg(long, global = true, env = "MCDE_WORKERS", default_value_t = 0)]
    pub workers: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Differentiate an expression once.
    Expand {
        #[arg(long)]
        label: String,
        #[arg(long)]
        expr: String,
    },
    /// Identity from differentiating a vanishing product.
    Identity {
        #[arg(long)]
        label: String,
        #[arg(long)]
        seed: String,
    },
    /// All identities up to a depth from one vanishing product.
    Hierarchy {
        #[arg(long)]
        seed: String,
        #[arg(long, value_delimiter = ',', required = true)]
        labels: Vec<String>,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Check whether a product is closed under a label.
    Closed {
        #[arg(long)]
        label: String,
        #[arg(long)]
        expr: String,
        #[arg(long)]
        transfer: bool,
    },
    /// Enumerate closed products within bounds.
    Search {
        /// Comma-separated `key=value` with keys factors, word, order, mult.
        #[arg(long, default_value = "factors=2,word=1,order=2,mult=2")]
        bounds: String,
        /// Atoms to use; all when omitted.
        #[arg(long, value_delimiter = ',')]
        atoms: Vec<String>,
        /// Labels allowed inside words; all when omitted.
        #[arg(long, value_delimiter = ',')]
        labels: Vec<String>,
        /// Labels to test closure under; defaults to `--labels`.
        #[arg(long, value_delimiter = ',')]
        under: Vec<String>,
        #[arg(long)]
        transfer: bool,
        /// Merge entries related by a symmetry of the rules.
        #[arg(long)]
        dedup: bool,
        /// Write the JSON catalog here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Differentiate the declared conditions and list the resulting relations.
    Saturate {
        #[arg(long, default_value_t = 1)]
        depth: usize,
    },
    /// Run the built-in table of worked examples and the oracle check.
    VerifyPaper,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Res<T> = Result<T, Failure>;

pub fn run<I, T>(args: I) -> RunOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                RunOutput {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                RunOutput {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    if let Command::VerifyPaper = cli.command {
        return verify_paper(cli.format);
    }
    match dispatch(&cli) {
        Ok(stdout) => RunOutput {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        },
        Err(Failure(msg)) => RunOutput {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
    }
}

fn load_rules(path: Option<&Path>) -> Res<RuleSet> {
    let path = path.ok_or_else(|| Failure("this command needs --spec FILE".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_spec_source(&SpecSource::new(
        text,
        path.display().to_string(),
    ))?)
}

fn label(r: &RuleSet, name: &str) -> Res<LabelId> {
    Ok(r.complex().require_label(name)?)
}

fn labels(r: &RuleSet, names: &[String]) -> Res<Vec<LabelId>> {
    names.iter().map(|n| label(r, n)).collect()
}

fn expr(r: &RuleSet, text: &str) -> Res<Expression> {
    Ok(parse_expr(r, text)?)
}

fn single(r: &RuleSet, text: &str) -> Res<Monomial> {
    let mut ms = expr(r, text)?.monomials();
    if ms.len() != 1 {
        return Err(Failure(format!("`{text}` must be a single product")));
    }
    Ok(ms.remove(0))
}

fn names(r: &RuleSet, ls: &[LabelId]) -> Vec<String> {
    ls.iter()
        .map(|&l| r.complex().label_name(l).to_string())
        .collect()
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values always serialize");
    s.push('\n');
    s
}

fn dispatch(cli: &Cli) -> Res<String> {
    let json = cli.format == Format::Json;
    let r = load_rules(cli.spec.as_deref())?;
    match &cli.command {
        Command::Expand { label: l, expr: e } => {
            let id = label(&r, l)?;
            let input = expr(&r, e)?;
            let out = differentiate(&r, id, &input)?;
            Ok(if json {
                pretty(&json!({"label": l, "input": input.to_string(), "result": out.to_string()}))
            } else {
                format!("{out}\n")
            })
        }
        Command::Identity { label: l, seed } => {
            let id = label(&r, l)?;
            let m = single(&r, seed)?;
            let found = derive_identity(&r, id, &m)?;
            let text = found.as_ref().map(|i| i.expression.to_string());
            Ok(if json {
                pretty(&json!({"label": l, "seed": seed, "identity": text}))
            } else {
                match text {
                    Some(t) => format!("{t} = 0\n"),
                    None => "trivial\n".to_string(),
                }
            })
        }
        Command::Hierarchy {
            seed,
            labels: ls,
            depth,
        } => {
            let ids = labels(&r, ls)?;
            let m = single(&r, seed)?;
            let found = hierarchy(&r, &m, &ids, *depth)?;
            if json {
                let rows: Vec<Value> = found
                    .iter()
                    .map(|i| {
                        json!({"applied": names(&r, &i.applied), "depth": i.depth, "identity": i.expression.to_string()})
                    })
                    .collect();
                Ok(pretty(&Value::Array(rows)))
            } else {
                Ok(found
                    .iter()
                    .map(|i| {
                        format!(
                            "[{}] {} = 0\n",
                            names(&r, &i.applied).join(","),
                            i.expression
                        )
                    })
                    .collect())
            }
        }
        Command::Closed {
            label: l,
            expr: e,
            transfer,
        } => {
            let id = label(&r, l)?;
            let m = single(&r, e)?;
            let mode = if *transfer {
                Mode::Transfer
            } else {
                Mode::Plain
            };
            let v = is_closed(&r, id, &m, mode)?;
            Ok(if json {
                pretty(&json!({
                    "closed": v.closed,
                    "label": l,
                    "mode": if *transfer { "transfer" } else { "plain" },
                    "witness": v.witness.to_string(),
                }))
            } else if v.closed {
                "CLOSED\n".to_string()
            } else {
                format!("NOT CLOSED\nwitness: {}\n", v.witness)
            })
        }
        Command::Search {
            bounds,
            atoms,
            labels: word_labels,
            under,
            transfer,
            dedup,
            out,
        } => {
            let b = parse_bounds(&r, bounds, atoms, word_labels)?;
            let under = if under.is_empty() {
                b.labels.clone()
            } else {
                labels(&r, under)?
            };
            let mode = if *transfer {
                Mode::Transfer
            } else {
                Mode::Plain
            };
            let mut cat = search_closed(&r, &b, &under, mode, cli.workers)?;
            if *dedup {
                cat = dedup_by_symmetry(&r, &cat);
            }
            let doc = CatalogDoc::from_catalog(&r, &cat)?;
            let text = doc.to_json();
            match out {
                Some(path) => {
                    std::fs::write(path, &text)
                        .map_err(|e| Failure(format!("cannot write {}: {e}", path.display())))?;
                    Ok(if json {
                        pretty(
                            &json!({"entries": doc.entries.len(), "out": path.display().to_string()}),
                        )
                    } else {
                        format!(
                            "{} closed products written to {}\n",
                            doc.entries.len(),
                            path.display()
                        )
                    })
                }
                None if json => Ok(text),
                None => Ok(doc
                    .entries
                    .iter()
                    .map(|e| {
                        format!(
                            "{}  closed under {}\n",
                            e.monomial.text,
                            e.closed_under.join(",")
                        )
                    })
                    .collect()),
            }
        }
        Command::Saturate { depth } => {
            let rel = saturate_conditions(&r, *depth)?;
            let coherence = |c: &IndexCoherence| if c.is_uniform() { "uniform" } else { "mixed" };
            if json {
                let rows: Vec<Value> = rel
                    .iter()
                    .map(|x| {
                        json!({
                            "applied": names(&r, &x.applied),
                            "coherence": coherence(&x.coherence),
                            "condition": x.condition,
                            "relation": x.expression.to_string(),
                        })
                    })
                    .collect();
                Ok(pretty(&Value::Array(rows)))
            } else {
                Ok(rel
                    .iter()
                    .map(|x| {
                        format!(
                            "cond {} [{}] {} = 0 ({})\n",
                            x.condition,
                            names(&r, &x.applied).join(","),
                            x.expression,
                            coherence(&x.coherence)
                        )
                    })
                    .collect())
            }
        }
        Command::VerifyPaper => unreachable!("handled before loading rules"),
    }
}

/// Parses `factors=2,word=1,order=2,mult=3`. Missing keys keep their defaults.
fn parse_bounds(
    r: &RuleSet,
    text: &str,
    atoms: &[String],
    word_labels: &[String],
) -> Res<SearchBounds> {
    let (mut factors, mut word, mut order, mut mult) = (2usize, 1usize, 2u32, 2u32);
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Failure(format!("bound `{part}` is not key=value")))?;
        let n: u32 = v
            .trim()
            .parse()
            .map_err(|_| Failure(format!("bound `{part}` needs a nonnegative integer")))?;
        match k.trim() {
            "factors" => factors = n as usize,
            "word" => word = n as usize,
            "order" => order = n,
            "mult" => mult = n,
            other => return Err(Failure(format!("unknown bound `{other}`"))),
        }
    }
    let atoms = if atoms.is_empty() {
        r.complex().atom_ids().collect()
    } else {
        atoms
            .iter()
            .map(|a| r.complex().require_atom(a))
            .collect::<Result<_, _>>()?
    };
    let ls = if word_labels.is_empty() {
        r.complex().label_ids().collect()
    } else {
        labels(r, word_labels)?
    };
    Ok(SearchBounds::new(factors, word, order, mult, atoms, ls)?)
}

fn verify_paper(format: Format) -> RunOutput {
    let results = verify::run_all();
    let failed = results.iter().filter(|c| !c.passed).count();
    let stdout = if format == Format::Json {
        let rows: Vec<Value> = results
            .iter()
            .map(|c| json!({"tag": c.tag, "passed": c.passed, "detail": c.detail}))
            .collect();
        pretty(&json!({"checks": rows, "failed": failed}))
    } else {
        let mut s = String::new();
        for c in &results {
            if c.passed {
                s.push_str(&format!("PASS {}\n", c.tag));
            } else {
                s.push_str(&format!("FAIL {}: {}\n", c.tag, c.detail));
            }
        }
        s.push_str(&format!("{} checks, {failed} failed\n", results.len()));
        s
    };
    RunOutput {
        code: if failed == 0 {
            EXIT_OK
        } else {
            EXIT_VERIFY_FAILED
        },
        stdout,
        stderr: String::new(),
    }
}
