//! `abc`: parse, explore and compare AbC models; translate and check bπ
//! terms.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abc_core::bpi::correspondence::check_correspondence;
use abc_core::bpi::encode::{encode, Encoder};
use abc_core::bpi::BpiProgram;
use abc_core::corpus;
use abc_core::equivalence::{barbs, check, formula_text, trace_text, weak_barbs, Mode, Verdict};
use abc_core::lts::{explore, export_aut, shared_alphabet, Bounds, ExploreOptions, DEFAULT_MAX_DEPTH, DEFAULT_MAX_STATES};
use abc_core::parser::bpi::program_text;
use abc_core::parser::pretty::{closed_pred_text, component_text, file_text, label_text, message_text, Quote};
use abc_core::parser::{parse_abc, parse_bpi, AbcFile};
use abc_core::semantics::Semantics;
use abc_core::{Component, ExploreError, Message};
use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value as Json};

const SCHEMA: &str = "abc-cli/1";

#[derive(Parser)]
#[command(name = "abc", version, about = "Workbench for the AbC calculus")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Treat domain violations as errors rather than undefined values.
    #[arg(long, global = true)]
    strict: bool,
    #[arg(long, global = true, env = "ABC_MAX_STATES", default_value_t = DEFAULT_MAX_STATES)]
    max_states: usize,
    #[arg(long, global = true, env = "ABC_MAX_DEPTH", default_value_t = DEFAULT_MAX_DEPTH)]
    max_depth: usize,
    /// Exploration threads; results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Model file whose `universe` entries are added to the input labels.
    #[arg(long, global = true, value_name = "FILE")]
    universe: Option<PathBuf>,
    /// Model file whose `domain` declarations are added.
    #[arg(long, global = true, value_name = "FILE")]
    domain: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a `.abc` or `.bpi` file and print it back.
    Parse { file: PathBuf },
    /// One-step successors of a system, with labels.
    Steps {
        file: PathBuf,
        #[arg(long)]
        system: Option<String>,
    },
    /// Explore a system and write its transition system in Aldebaran format.
    Explore {
        file: PathBuf,
        #[arg(long)]
        system: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Barbs of the initial state.
    Barbs {
        file: PathBuf,
        #[arg(long)]
        system: Option<String>,
        /// Include barbs reachable through silent moves.
        #[arg(long)]
        weak: bool,
    },
    /// Decide strong or weak bisimilarity of two systems.
    CheckBisim {
        #[arg(long, conflicts_with = "weak", required_unless_present = "weak")]
        strong: bool,
        #[arg(long)]
        weak: bool,
        a: PathBuf,
        b: PathBuf,
        /// System of the first file.
        #[arg(long)]
        left: Option<String>,
        /// System of the second file.
        #[arg(long)]
        right: Option<String>,
    },
    /// Encode a bπ term as an AbC model.
    Translate {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check the encoding of a bπ term step by step against the source.
    VerifyEncoding { file: PathBuf },
    /// Run the bundled regression corpus.
    Corpus,
}

struct Ctx {
    json: bool,
    options: ExploreOptions,
    universe: Vec<Message>,
    domain: Option<AbcFile>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_abc(path: &Path) -> Result<AbcFile> {
    parse_abc(&read(path)?).map_err(|e| anyhow!("{}:{e}", path.display()))
}

fn load_bpi(path: &Path) -> Result<BpiProgram> {
    parse_bpi(&read(path)?).map_err(|e| anyhow!("{}:{e}", path.display()))
}

fn is_bpi(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "bpi")
}

impl Ctx {
    fn model(&self, path: &Path) -> Result<AbcFile> {
        let mut f = load_abc(path)?;
        if let Some(d) = &self.domain {
            f.defs.domains.merge(&d.defs.domains)?;
        }
        Ok(f)
    }

    fn extra(&self, f: &AbcFile) -> Vec<Message> {
        f.universe.iter().chain(&self.universe).cloned().collect()
    }

    fn emit(&self, text: String, value: Json) {
        if self.json {
            let mut value = value;
            value["schema"] = json!(SCHEMA);
            println!("{}", serde_json::to_string_pretty(&value).expect("json"));
        } else {
            print!("{text}");
        }
    }
}

fn pick<'a>(f: &'a AbcFile, name: Option<&str>, path: &Path) -> Result<&'a Component> {
    f.system(name).ok_or_else(|| match name {
        Some(n) => anyhow!("{}: no system or component named `{n}`", path.display()),
        None => anyhow!("{}: several systems; choose one by name", path.display()),
    })
}

fn bound_message(e: &ExploreError) -> String {
    match e {
        ExploreError::BoundExceeded { .. } => format!("inconclusive under bounds: {e}"),
        _ => e.to_string(),
    }
}

fn run(cli: Cli) -> Result<u8> {
    let g = cli.global;
    let options = ExploreOptions {
        bounds: Bounds { max_states: g.max_states, max_depth: g.max_depth },
        jobs: g.jobs,
        strict: g.strict,
    };
    let universe = match &g.universe {
        Some(p) => load_abc(p)?.universe,
        None => Vec::new(),
    };
    let domain = g.domain.as_deref().map(load_abc).transpose()?;
    let ctx = Ctx { json: g.json, options, universe, domain };

    match cli.command {
        Command::Parse { file } => {
            let (kind, text) = if is_bpi(&file) {
                ("bpi", program_text(&load_bpi(&file)?) + "\n")
            } else {
                ("abc", file_text(&ctx.model(&file)?))
            };
            ctx.emit(text.clone(), json!({ "kind": kind, "text": text }));
            Ok(0)
        }
        Command::Steps { file, system } => {
            let f = ctx.model(&file)?;
            let c = pick(&f, system.as_deref(), &file)?;
            f.defs.validate()?;
            f.defs.validate_component(c)?;
            let u = shared_alphabet(&[c], &ctx.extra(&f), &f.defs, &ctx.options).map_err(|e| anyhow!(bound_message(&e)))?;
            let sem = Semantics { defs: &f.defs, strict: ctx.options.strict };
            let steps = sem.system_steps(c, &u)?;
            let mut text = String::new();
            let mut rows = Vec::new();
            for (l, c2) in &steps {
                let (lt, ct) = (label_text(l, &f.defs.domains), component_text(&c2.canonical()));
                text.push_str(&format!("{lt}\n    -> {ct}\n"));
                rows.push(json!({ "label": lt, "target": ct }));
            }
            ctx.emit(text, json!({ "steps": rows }));
            Ok(0)
        }
        Command::Explore { file, system, output } => {
            let f = ctx.model(&file)?;
            let c = pick(&f, system.as_deref(), &file)?;
            f.defs.validate()?;
            f.defs.validate_component(c)?;
            let lts = shared_alphabet(&[c], &ctx.extra(&f), &f.defs, &ctx.options)
                .and_then(|u| explore(c, &u, &f.defs, &ctx.options))
                .map_err(|e| anyhow!(bound_message(&e)))?;
            let aut = export_aut(&lts);
            let summary = json!({
                "states": lts.num_states(),
                "transitions": lts.transitions.len(),
                "labels": lts.labels.len(),
            });
            match output {
                Some(p) => {
                    fs::write(&p, &aut).with_context(|| format!("cannot write {}", p.display()))?;
                    let text = format!(
                        "{} states, {} transitions written to {}\n",
                        lts.num_states(),
                        lts.transitions.len(),
                        p.display()
                    );
                    ctx.emit(text, summary);
                }
                None => {
                    let mut v = summary;
                    v["aut"] = json!(aut);
                    ctx.emit(aut.clone(), v);
                }
            }
            Ok(0)
        }
        Command::Barbs { file, system, weak } => {
            let f = ctx.model(&file)?;
            let c = pick(&f, system.as_deref(), &file)?;
            f.defs.validate()?;
            f.defs.validate_component(c)?;
            let lts = shared_alphabet(&[c], &ctx.extra(&f), &f.defs, &ctx.options)
                .and_then(|u| explore(c, &u, &f.defs, &ctx.options))
                .map_err(|e| anyhow!(bound_message(&e)))?;
            let found = if weak { weak_barbs(&lts, lts.initial()) } else { barbs(&lts, lts.initial()) };
            let texts: Vec<String> = found.iter().map(|p| closed_pred_text(p, Quote::Single)).collect();
            let text: String = texts.iter().map(|t| format!("{t}\n")).collect();
            ctx.emit(text, json!({ "weak": weak, "barbs": texts }));
            Ok(0)
        }
        Command::CheckBisim { strong, weak: _, a, b, left, right } => {
            let mode = if strong { Mode::Strong } else { Mode::Weak };
            let fa = ctx.model(&a)?;
            let fb = ctx.model(&b)?;
            let mut defs = fa.defs.clone();
            defs.merge(&fb.defs).context("the two files disagree on a definition or domain")?;
            let l = pick(&fa, left.as_deref(), &a)?;
            let r = pick(&fb, right.as_deref(), &b)?;
            let mut extra = ctx.extra(&fa);
            extra.extend(fb.universe.iter().cloned());
            let v = check(l, r, &defs, &extra, &ctx.options, mode).map_err(|e| anyhow!(bound_message(&e)))?;
            let (text, value) = verdict_report(&v, &defs.domains);
            ctx.emit(text, value);
            Ok(if v.equivalent { 0 } else { 1 })
        }
        Command::Translate { file, output } => {
            let prog = load_bpi(&file)?;
            let enc = encode(&prog);
            let out = AbcFile { defs: enc.defs, main: Some(enc.system), ..AbcFile::default() };
            let text = file_text(&out);
            match output {
                Some(p) => {
                    fs::write(&p, &text).with_context(|| format!("cannot write {}", p.display()))?;
                    ctx.emit(format!("written to {}\n", p.display()), json!({ "output": p.display().to_string() }));
                }
                None => ctx.emit(text.clone(), json!({ "text": text })),
            }
            Ok(0)
        }
        Command::VerifyEncoding { file } => {
            let prog = load_bpi(&file)?;
            let report = check_correspondence(&prog, &Encoder::identity(), &ctx.options).map_err(|e| anyhow!(e.to_string()))?;
            let mut text = format!(
                "{} states checked against {} external messages\nsource: {} states, {} transitions\nencoding: {} states, {} transitions\n",
                report.states_checked,
                report.universe_size,
                report.bpi_states,
                report.bpi_transitions,
                report.abc_states,
                report.abc_transitions
            );
            for v in &report.violations {
                text.push_str(&format!("violation: {v}\n"));
            }
            text.push_str(if report.ok() { "ok\n" } else { "FAILED\n" });
            let value = json!({
                "ok": report.ok(),
                "states_checked": report.states_checked,
                "universe_size": report.universe_size,
                "source": { "states": report.bpi_states, "transitions": report.bpi_transitions },
                "encoding": { "states": report.abc_states, "transitions": report.abc_transitions },
                "violations": report.violations,
            });
            ctx.emit(text, value);
            Ok(if report.ok() { 0 } else { 1 })
        }
        Command::Corpus => {
            let outcomes = corpus::run(&ctx.options);
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            let mut text = String::new();
            for o in &outcomes {
                text.push_str(&format!("{} {} ({})\n", if o.passed { "ok  " } else { "FAIL" }, o.name, o.detail));
            }
            text.push_str(&format!("{} cases, {} failed\n", outcomes.len(), failed));
            let rows: Vec<Json> =
                outcomes.iter().map(|o| json!({ "name": o.name, "passed": o.passed, "detail": o.detail })).collect();
            ctx.emit(text, json!({ "cases": rows, "failed": failed }));
            Ok(if failed == 0 { 0 } else { 1 })
        }
    }
}

fn verdict_report(v: &Verdict, domains: &abc_core::DomainContext) -> (String, Json) {
    let outcome = if v.equivalent { "equivalent" } else { "not equivalent" };
    let witness = v.witness.as_ref().map(|f| formula_text(f, domains));
    let trace = v.trace.as_ref().map(|t| (if t.left { "left" } else { "right" }, trace_text(t, domains)));
    let trace_steps: Option<Vec<String>> =
        v.trace.as_ref().map(|t| trace_text(t, domains).split("; ").map(str::to_string).collect());
    let mut text = format!(
        "{} bisimilarity: {outcome}\nstates: {} / {}\nuniverse: {} messages, fingerprint {}\n",
        v.mode.name(),
        v.left_states,
        v.right_states,
        v.universe.len(),
        v.fingerprint
    );
    if let Some(w) = &witness {
        text.push_str(&format!("witness: {w}\n"));
    }
    if let Some((side, t)) = &trace {
        text.push_str(&format!("trace only on the {side}: {t}\n"));
    }
    let value = json!({
        "mode": v.mode.name(),
        "equivalent": v.equivalent,
        "left_states": v.left_states,
        "right_states": v.right_states,
        "universe": v.universe.iter().map(|m| message_text(m, Quote::Single)).collect::<Vec<_>>(),
        "fingerprint": v.fingerprint,
        "witness": witness,
        "trace": trace.as_ref().map(|(side, _)| json!({ "side": side, "steps": trace_steps })),
    });
    (text, value)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("abc: {e:#}");
            ExitCode::from(2)
        }
    }
}
