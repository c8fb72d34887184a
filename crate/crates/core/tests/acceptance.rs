//! Acceptance suite. Prints one line per criterion and exits non-zero when
//! any of them fails.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;

use abc_core::bpi::correspondence::{check_correspondence, encoded_verdict};
use abc_core::bpi::encode::Encoder;
use abc_core::bpi::semantics::{bpi_bisimilar, bpi_universe, explore_bpi, BpiMessage};
use abc_core::bpi::{Bpi, BpiProgram};
use abc_core::corpus::{abc_source, bpi_pairs, bpi_terms, run_bisim_case, BisimCase, ABC_FILES, BISIM_CASES};
use abc_core::equivalence::{check, label_equiv, weak_barbs, Mode, Step};
use abc_core::lts::{explore, export_aut, shared_alphabet, ExploreOptions, Lts};
use abc_core::parser::bpi::program_text;
use abc_core::parser::pretty::{component_text, file_text};
use abc_core::parser::{parse_abc, parse_bpi, parse_component, parse_closed_predicate};
use abc_core::predicates::{equiv, implies, is_ff, normalize, Term};
use abc_core::terms::Rel;
use abc_core::{AttributeEnv, ClosedPredicate, Component, Defs, DomainContext, Label, Message, Semantics, Value};
use common::{compare_systems, law_rewrite, Gen};

/// Random predicate pairs checked against the model-enumeration oracle.
const ORACLE_PAIRS: usize = 500;
/// Random components for the transition properties.
const TRANSITION_COMPONENTS: usize = 200;
/// Equivalent pairs put through contexts.
const CONGRUENCE_PAIRS: usize = 100;
const MIN_BPI_TERMS: usize = 30;
const MIN_BPI_PAIRS: usize = 5;
const MIN_LAW_INSTANCES: usize = 3;
const RANDOM_ROUND_TRIPS: usize = 1000;
const SEED: u64 = 0xabc;

struct Report {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Report {
    fn new() -> Self {
        Report { failures: Vec::new(), notes: Vec::new() }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }
}

fn pred(src: &str) -> ClosedPredicate {
    parse_closed_predicate(src).unwrap_or_else(|e| panic!("{src}: {e}"))
}

fn corpus_file(name: &str) -> abc_core::parser::AbcFile {
    parse_abc(abc_source(name).expect("corpus file")).expect("corpus parses")
}

// ---------------------------------------------------------------------------
// 1. predicate solver

/// Independent truth evaluation: `None` is an undefined attribute.
fn oracle_eval(p: &ClosedPredicate, env: &[(String, Option<Value>)]) -> bool {
    let look = |t: &Term| -> Option<Value> {
        match t {
            Term::Const(v) => Some(v.clone()),
            Term::Attr(a) => env.iter().find(|(n, _)| n == a).and_then(|(_, v)| v.clone()),
        }
    };
    match p {
        ClosedPredicate::True => true,
        ClosedPredicate::False => false,
        ClosedPredicate::Not(q) => !oracle_eval(q, env),
        ClosedPredicate::And(a, b) => oracle_eval(a, env) && oracle_eval(b, env),
        ClosedPredicate::Or(a, b) => oracle_eval(a, env) || oracle_eval(b, env),
        ClosedPredicate::Atom(rel, l, r) => {
            let (l, r) = (look(l), look(r));
            let eq = l.is_some() && l == r;
            match (rel, l, r) {
                (Rel::Eq, _, _) => eq,
                (Rel::Ne, _, _) => !eq,
                (Rel::Lt, Some(Value::Int(a)), Some(Value::Int(b))) => a < b,
                (Rel::Le, Some(Value::Int(a)), Some(Value::Int(b))) => a <= b,
                (Rel::Gt, Some(Value::Int(a)), Some(Value::Int(b))) => a > b,
                (Rel::Ge, Some(Value::Int(a)), Some(Value::Int(b))) => a >= b,
                _ => false,
            }
        }
    }
}

const ORACLE_ATTRS: [&str; 3] = ["a", "b", "c"];

fn oracle_constants() -> Vec<Value> {
    vec![Value::Int(0), Value::Int(5), Value::name("x"), Value::name("y")]
}

/// Every assignment of {undefined, -3..=8, x, y, z} to the three attributes.
fn oracle_models() -> Vec<Vec<(String, Option<Value>)>> {
    let mut cands: Vec<Option<Value>> = vec![None];
    cands.extend((-3..=8).map(|i| Some(Value::Int(i))));
    cands.extend(["x", "y", "z"].iter().map(|s| Some(Value::name(*s))));
    let mut models = vec![Vec::new()];
    for a in ORACLE_ATTRS {
        let mut next = Vec::new();
        for m in &models {
            for c in &cands {
                let mut m2: Vec<(String, Option<Value>)> = m.clone();
                m2.push((a.to_string(), c.clone()));
                next.push(m2);
            }
        }
        models = next;
    }
    models
}

fn random_oracle_pred(g: &mut Gen, depth: usize) -> ClosedPredicate {
    let consts = oracle_constants();
    if depth == 0 || g.chance(0.4) {
        let rel = [Rel::Eq, Rel::Ne, Rel::Lt, Rel::Le, Rel::Gt, Rel::Ge][g.below(6)];
        let lhs = Term::Attr(ORACLE_ATTRS[g.below(3)].to_string());
        let rhs = if g.chance(0.25) {
            Term::Attr(ORACLE_ATTRS[g.below(3)].to_string())
        } else {
            Term::Const(consts[g.below(consts.len())].clone())
        };
        return match g.below(12) {
            0 => ClosedPredicate::True,
            1 => ClosedPredicate::False,
            _ => ClosedPredicate::atom(rel, lhs, rhs),
        };
    }
    let p = random_oracle_pred(g, depth - 1);
    match g.below(3) {
        0 => ClosedPredicate::negate(p),
        1 => ClosedPredicate::and(p, random_oracle_pred(g, depth - 1)),
        _ => ClosedPredicate::or(p, random_oracle_pred(g, depth - 1)),
    }
}

fn criterion_1(r: &mut Report) {
    let none = DomainContext::new();
    r.require(equiv(&pred("a != 10"), &pred("!(a == 10)"), &none), "a != 10 and !(a == 10) differ");

    let lhs = pred("role == \"client\" && role != \"fwd\"");
    let rhs = pred("role == \"client\"");
    let roles = DomainContext::new().with("role", &["client", "fwd"]);
    r.require(equiv(&lhs, &rhs, &roles), "role conjunction not equivalent under the role domain");
    // Required to be false without a domain. Every model of role == client
    // also satisfies role != fwd, so a sound solver cannot meet this.
    r.require(!equiv(&lhs, &rhs, &none), "role conjunction equivalent without a domain");

    let mut g = Gen::new(SEED);
    let models = oracle_models();
    let mut agree = 0;
    for i in 0..ORACLE_PAIRS {
        let p = random_oracle_pred(&mut g, 3);
        let q = random_oracle_pred(&mut g, 3);
        let truth = models.iter().all(|m| !oracle_eval(&p, m) || oracle_eval(&q, m));
        if implies(&p, &q, &none) == truth {
            agree += 1;
        } else if r.failures.len() < 5 {
            r.failures.push(format!("pair {i}: implies({p:?}, {q:?}) != {truth}"));
        }
    }
    r.note(format!("oracle agreement {agree}/{ORACLE_PAIRS}"));
    r.require(agree == ORACLE_PAIRS, "oracle disagreement");
}

// ---------------------------------------------------------------------------
// 2. semantics of the forwarding system

/// All maximal paths of output transitions from the initial state.
fn output_paths(lts: &Lts) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(lts.initial(), Vec::new())];
    while let Some((s, path)) = stack.pop() {
        let next: Vec<_> =
            lts.transitions.iter().filter(|t| t.from == s && lts.labels[t.label].is_output()).collect();
        if next.is_empty() {
            out.push(path);
            continue;
        }
        for t in next {
            let mut p = path.clone();
            p.push(t.label);
            stack.push((t.to, p));
        }
    }
    out
}

fn criterion_2(r: &mut Report) {
    let file = corpus_file("forwarding.abc");
    let n = file.system(Some("N")).expect("N");
    let opts = ExploreOptions::default();
    let universe = shared_alphabet(&[n], &file.universe, &file.defs, &opts).expect("alphabet");
    let lts = explore(n, &universe, &file.defs, &opts).expect("explore N");
    let dom = &lts.domains;

    let fwd = AttributeEnv::new().with("role", Value::name("fwd"));
    let pi1 = Label::Output(Message::new(
        fwd,
        pred("role == \"client\""),
        vec![Value::name("p"), Value::name("v")],
    ));
    let first: Vec<_> =
        lts.transitions.iter().filter(|t| t.from == lts.initial() && lts.labels[t.label].is_output()).collect();
    r.require(first.len() == 1, format!("{} initial outputs", first.len()));
    r.require(
        first.iter().all(|t| label_equiv(&lts.labels[t.label], &pi1, dom)),
        "first output is not the Pi1 advertisement",
    );

    let paths = output_paths(&lts);
    r.note(format!("{} states, {} output paths", lts.num_states(), paths.len()));
    r.require(!paths.is_empty(), "no output paths");
    for p in &paths {
        let visible: Vec<usize> = p.iter().copied().filter(|&l| !lts.is_tau(l)).collect();
        let taus = p.len() - visible.len();
        r.require(
            visible.len() == 3 && visible.iter().all(|&l| label_equiv(&lts.labels[l], &pi1, dom)),
            "a path does not emit exactly three Pi1 advertisements",
        );
        r.require(taus == 2, format!("a path has {taus} silent steps"));
    }
    let fwd_tau = pred("role == \"fwd\" && role != \"fwd\"");
    let narrated = paths.iter().any(|p| {
        p.len() >= 2 && lts.is_tau(p[1]) && {
            let m = lts.labels[p[1]].message();
            equiv(&m.pred, &fwd_tau, dom) && is_ff(&m.pred, dom)
        }
    });
    r.require(narrated, "no run with the forwarder's silent step right after the advertisement");
}

// ---------------------------------------------------------------------------
// 3. bisimilarity verdicts

fn criterion_3(r: &mut Report) {
    let opts = ExploreOptions::default();
    let wanted: &[(&str, &str)] = &[
        ("choice_split.abc", "L2"),
        ("choice_split.abc", "L3"),
        ("choice_split.abc", "L3"),
        ("forwarding.abc", "N"),
        ("forwarding.abc", "OpenCP2"),
        ("mixed_choice.abc", "Bare1"),
        ("mixed_choice.abc", "WithOut1"),
        ("contexts.abc", "Input_L"),
        ("contexts.abc", "Par_L"),
        ("contexts.abc", "Update_L"),
    ];
    let cases: Vec<&BisimCase> =
        BISIM_CASES.iter().filter(|c| wanted.iter().any(|(f, l)| c.file == *f && c.left == *l)).collect();
    r.require(cases.len() == wanted.len(), "missing corpus cases");
    for c in &cases {
        let o = run_bisim_case(c, &opts);
        r.require(o.passed, format!("{} ({})", o.name, o.detail));
    }

    let file = corpus_file("forwarding.abc");
    let (l, rr) = (file.system(Some("OpenCP2")).unwrap(), file.system(Some("TCP2")).unwrap());
    let v = check(l, rr, &file.defs, &file.universe, &opts, Mode::Weak).expect("check");
    let lts_l = explore(l, &v.universe, &file.defs, &opts).expect("explore");
    let lts_r = explore(rr, &v.universe, &file.defs, &opts).expect("explore");
    let dom = &lts_l.domains;
    let pi1 = pred("role == \"client\"");
    let carries_f3 = v.trace.as_ref().is_some_and(|t| {
        t.steps.iter().any(|s| match s {
            Step::Label(Label::Output(m)) => m.values.first() == Some(&Value::name("f3")) && equiv(&m.pred, &pi1, dom),
            _ => false,
        })
    });
    r.require(!v.equivalent, "N || CP2 judged equivalent to T || CP2");
    r.require(carries_f3, "witness trace has no Pi1 output carrying f3");
    r.require(v.witness.is_some() && v.replay(&lts_l, &lts_r), "witness does not replay");
    r.note(format!("{} corpus verdicts, trace of {} steps", cases.len(), v.trace.map_or(0, |t| t.steps.len())));
}

// ---------------------------------------------------------------------------
// 4. laws

fn transition_properties(r: &mut Report) {
    let defs = Defs::default();
    let sem = Semantics::new(&defs);
    let none = DomainContext::new();
    let mut g = Gen::new(SEED + 4);
    let (mut ff_inputs, mut taus) = (0usize, 0usize);
    for i in 0..TRANSITION_COMPONENTS {
        let c1 = g.component(2);
        let c = g.component(2);
        // Unsatisfiable inputs leave the system unchanged.
        let mut msg = g.message();
        msg.pred = ClosedPredicate::and(msg.pred.clone(), ClosedPredicate::negate(msg.pred.clone()));
        for target in [&c1, &c] {
            ff_inputs += 1;
            match sem.system_in_step(target, &msg) {
                Ok(s) => r.require(s == vec![target.clone()], format!("component {i}: ff input moved")),
                Err(e) => r.require(false, format!("component {i}: {e}")),
            }
        }
        // Equivalent predicates give the same reactions.
        let m1 = g.message();
        let mut m2 = m1.clone();
        m2.pred = match g.below(3) {
            0 => ClosedPredicate::negate(ClosedPredicate::negate(m1.pred.clone())),
            1 => ClosedPredicate::or(ClosedPredicate::False, m1.pred.clone()),
            _ => normalize(&m1.pred, &none),
        };
        r.require(equiv(&m1.pred, &m2.pred, &none), "rewritten predicate not equivalent");
        let (a, b) = (sem.system_in_step(&c1, &m1), sem.system_in_step(&c1, &m2));
        r.require(a.is_ok() && a == b, format!("component {i}: reactions depend on the predicate's form"));

        // Silent moves survive parallel composition and restriction.
        let Ok(steps) = sem.system_out_steps(&c1) else {
            r.require(false, format!("component {i}: output error"));
            continue;
        };
        let f = g.restriction();
        for (_, c1b) in steps.iter().filter(|(m, _)| is_ff(&m.pred, &none)) {
            taus += 1;
            let has = |sys: &Component, target: &Component| {
                sem.system_out_steps(sys)
                    .map(|v| v.iter().any(|(m2, s2)| s2 == target && is_ff(&m2.pred, &none)))
                    .unwrap_or(false)
            };
            r.require(has(&Component::par(c1.clone(), c.clone()), &Component::par(c1b.clone(), c.clone())), format!("component {i}: C1 || C lost tau"));
            r.require(has(&Component::par(c.clone(), c1.clone()), &Component::par(c.clone(), c1b.clone())), format!("component {i}: C || C1 lost tau"));
            r.require(
                has(&Component::restrict_out(f.clone(), c1.clone()), &Component::restrict_out(f.clone(), c1b.clone())),
                format!("component {i}: output restriction lost tau"),
            );
            r.require(
                has(&Component::restrict_in(f.clone(), c1.clone()), &Component::restrict_in(f.clone(), c1b.clone())),
                format!("component {i}: input restriction lost tau"),
            );
        }
    }
    r.note(format!("{TRANSITION_COMPONENTS} components, {ff_inputs} ff inputs, {taus} silent moves"));
    r.require(taus >= 20, "too few silent moves to exercise the properties");
}

fn criterion_4(r: &mut Report) {
    let opts = ExploreOptions::default();
    let files = ["laws_system_par.abc", "laws_choice.abc", "laws_process_par.abc", "laws_awareness.abc", "laws_silent.abc"];
    let mut counts = Vec::new();
    for f in files {
        let cases: Vec<_> = BISIM_CASES.iter().filter(|c| c.file == f).collect();
        r.require(cases.len() >= MIN_LAW_INSTANCES, format!("{f}: only {} instances", cases.len()));
        for c in &cases {
            let o = run_bisim_case(c, &opts);
            r.require(o.passed && c.equivalent, format!("{} ({})", o.name, o.detail));
        }
        counts.push(format!("{f} {}", cases.len()));
    }
    r.note(counts.join(", "));
    transition_properties(r);
}

// ---------------------------------------------------------------------------
// 5. congruence

fn barbs_agree(l: &Lts, rr: &Lts) -> bool {
    let (a, b) = (weak_barbs(l, l.initial()), weak_barbs(rr, rr.initial()));
    let covers = |x: &[ClosedPredicate], y: &[ClosedPredicate]| x.iter().all(|p| y.iter().any(|q| equiv(p, q, &l.domains)));
    covers(&a, &b) && covers(&b, &a)
}

fn criterion_5(r: &mut Report) {
    let defs = Defs::default();
    let mut g = Gen::new(SEED + 5);
    let (mut pairs, mut attempts, mut skipped) = (0, 0, 0);
    while pairs < CONGRUENCE_PAIRS && attempts < 10 * CONGRUENCE_PAIRS {
        attempts += 1;
        let c1 = g.component(2);
        let c2 = law_rewrite(&mut g, &c1);
        let Some((v, l, rr)) = compare_systems(&c1, &c2, &defs, Mode::Weak) else {
            skipped += 1;
            continue;
        };
        if !v.equivalent {
            r.require(false, format!("rewrite judged inequivalent: {}", component_text(&c1)));
            continue;
        }
        pairs += 1;
        r.require(barbs_agree(&l, &rr), format!("weak barbs differ: {}", component_text(&c1)));
        let ctx = g.component(1);
        let f = g.restriction();
        let contexts: [(&str, Component, Component); 4] = [
            ("C1 || C", Component::par(c1.clone(), ctx.clone()), Component::par(c2.clone(), ctx.clone())),
            ("C || C1", Component::par(ctx.clone(), c1.clone()), Component::par(ctx.clone(), c2.clone())),
            ("restrictOut", Component::restrict_out(f.clone(), c1.clone()), Component::restrict_out(f.clone(), c2.clone())),
            ("restrictIn", Component::restrict_in(f.clone(), c1.clone()), Component::restrict_in(f.clone(), c2.clone())),
        ];
        for (name, a, b) in contexts {
            match compare_systems(&a, &b, &defs, Mode::Weak) {
                Some((v, la, lb)) => {
                    r.require(v.equivalent, format!("{name} breaks equivalence: {}", component_text(&a)));
                    r.require(barbs_agree(&la, &lb), format!("{name}: weak barbs differ"));
                }
                None => skipped += 1,
            }
        }
    }
    r.note(format!("{pairs} equivalent pairs, {skipped} skipped under bounds"));
    r.require(pairs == CONGRUENCE_PAIRS, format!("only {pairs} pairs"));
}

// ---------------------------------------------------------------------------
// 6. encoding

#[derive(Default)]
struct Coverage {
    clauses: BTreeSet<&'static str>,
}

impl Coverage {
    fn visit(&mut self, t: &Bpi) {
        match t {
            Bpi::Nil => {
                self.clauses.insert("nil");
            }
            Bpi::Tau(k) => {
                self.clauses.insert("tau");
                self.visit(k);
            }
            Bpi::Output { cont, .. } => {
                self.clauses.insert("output");
                self.visit(cont);
            }
            Bpi::Input { cont, .. } => {
                self.clauses.insert("input");
                self.visit(cont);
            }
            Bpi::Sum(a, b) => {
                self.clauses.insert("choice");
                self.visit(a);
                self.visit(b);
            }
            Bpi::Rec { body, .. } => {
                self.clauses.insert("rec");
                self.visit(body);
            }
            Bpi::Call { .. } => {
                self.clauses.insert("call");
            }
        }
    }
}

/// Classifies the broadcast steps of two-sided parallel states: the left
/// sends and the right receives, the reverse, a sender whose partner
/// discards, and a silent step.
fn parallel_cases(prog: &BpiProgram, cases: &mut BTreeSet<&'static str>) {
    let Ok(universe) = bpi_universe(&[prog], 10_000) else { return };
    let Ok(lts) = explore_bpi(prog, &universe, 10_000) else { return };
    for s in &lts.states {
        for i in 0..s.len() {
            let Ok(outs) = prog.seq_outputs(&s[i]) else { continue };
            for (m, _) in outs {
                let Some(m): Option<BpiMessage> = m else {
                    cases.insert("tau");
                    continue;
                };
                for j in (0..s.len()).filter(|&j| j != i) {
                    match prog.seq_inputs(&s[j], &m) {
                        Ok(v) if v.is_empty() => {
                            cases.insert("discard");
                        }
                        Ok(_) if i < j => {
                            cases.insert("left sends");
                        }
                        Ok(_) => {
                            cases.insert("right sends");
                        }
                        Err(_) => {}
                    }
                }
            }
        }
    }
}

fn criterion_6(r: &mut Report) {
    let opts = ExploreOptions::default();
    let terms = bpi_terms();
    r.require(terms.len() >= MIN_BPI_TERMS, format!("only {} terms", terms.len()));
    let mut cov = Coverage::default();
    let mut par = BTreeSet::new();
    let (mut states, mut transitions) = (0, 0);
    for (name, src) in &terms {
        let prog = match parse_bpi(src) {
            Ok(p) => p,
            Err(e) => {
                r.require(false, format!("{name}: {e}"));
                continue;
            }
        };
        prog.source.iter().for_each(|t| cov.visit(t));
        if prog.source.len() > 1 {
            cov.clauses.insert("parallel");
            parallel_cases(&prog, &mut par);
        }
        match check_correspondence(&prog, &Encoder::identity(), &opts) {
            Ok(rep) => {
                states += rep.states_checked;
                transitions += rep.bpi_transitions;
                r.require(rep.ok(), format!("{name}: {}", rep.violations.join("; ")));
                r.require(
                    rep.bpi_states == rep.abc_states && rep.bpi_transitions == rep.abc_transitions,
                    format!("{name}: transition counts differ"),
                );
            }
            Err(e) => r.require(false, format!("{name}: {e}")),
        }
    }
    for clause in ["nil", "tau", "output", "input", "choice", "rec", "call", "parallel"] {
        r.require(cov.clauses.contains(clause), format!("no term uses {clause}"));
    }
    for case in ["left sends", "right sends", "discard", "tau"] {
        r.require(par.contains(case), format!("parallel case {case} not covered"));
    }

    let pairs = bpi_pairs();
    let eq = pairs.iter().filter(|p| p.0).count();
    r.require(eq >= MIN_BPI_PAIRS && pairs.len() - eq >= MIN_BPI_PAIRS, "too few curated pairs");
    for (expected, a, b) in &pairs {
        let (Ok(p), Ok(q)) = (parse_bpi(a), parse_bpi(b)) else {
            r.require(false, format!("pair {a} / {b} does not parse"));
            continue;
        };
        let src = bpi_bisimilar(&p, &q, Mode::Weak, opts.bounds.max_states);
        let enc = encoded_verdict(&p, &q, Mode::Weak, &opts).map(|v| v.equivalent);
        r.require(
            src.as_ref().ok() == Some(expected) && enc.as_ref().ok() == Some(expected),
            format!("pair {a} / {b}: expected {expected}, source {src:?}, encoding {enc:?}"),
        );
    }
    r.note(format!(
        "{} terms, {states} states, {transitions} transitions, {}+{} pairs",
        terms.len(),
        eq,
        pairs.len() - eq
    ));
}

// ---------------------------------------------------------------------------
// 7. infrastructure

fn aut_of(file: &abc_core::parser::AbcFile, name: &str, jobs: usize) -> Option<String> {
    let c = file.system(Some(name))?;
    let opts = ExploreOptions { jobs, ..Default::default() };
    let u = shared_alphabet(&[c], &file.universe, &file.defs, &opts).ok()?;
    Some(export_aut(&explore(c, &u, &file.defs, &opts).ok()?))
}

fn criterion_7(r: &mut Report) {
    for (name, src) in ABC_FILES {
        let ok = parse_abc(src).ok().is_some_and(|f| parse_abc(&file_text(&f)).ok() == Some(f));
        r.require(ok, format!("{name} does not round trip"));
    }
    for (name, src) in bpi_terms() {
        let ok = parse_bpi(src).ok().is_some_and(|p| parse_bpi(&program_text(&p)).ok() == Some(p));
        r.require(ok, format!("bpi term {name} does not round trip"));
    }
    let mut g = Gen::new(SEED + 7);
    for i in 0..RANDOM_ROUND_TRIPS {
        let c = g.component(3);
        let text = component_text(&c);
        r.require(parse_component(&text).ok() == Some(c), format!("random component {i} does not round trip: {text}"));
        let terms = g.bpi_terms(4);
        match BpiProgram::new(terms) {
            Ok(p) => {
                let text = program_text(&p);
                r.require(parse_bpi(&text).ok() == Some(p), format!("random bpi program {i} does not round trip: {text}"));
            }
            Err(e) => r.require(false, format!("random bpi program {i}: {e}")),
        }
    }

    let mut exports = 0;
    for (fname, _) in ABC_FILES {
        let file = corpus_file(fname);
        for sys in file.systems.keys() {
            let base = aut_of(&file, sys, 1);
            let same = [aut_of(&file, sys, 1), aut_of(&file, sys, 2), aut_of(&file, sys, 4)].iter().all(|a| *a == base);
            r.require(base.is_some() && same, format!("{fname} {sys}: .aut differs across runs or jobs"));
            exports += 1;
        }
    }
    r.note(format!("{RANDOM_ROUND_TRIPS} random components and bpi programs, {exports} systems exported"));
}

fn main() -> ExitCode {
    let criteria: [(&str, fn(&mut Report)); 7] = [
        ("predicate solver", criterion_1),
        ("forwarding semantics", criterion_2),
        ("bisimilarity verdicts", criterion_3),
        ("laws", criterion_4),
        ("congruence", criterion_5),
        ("encoding", criterion_6),
        ("infrastructure", criterion_7),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let mut r = Report::new();
        run(&mut r);
        let status = if r.failures.is_empty() { "PASS" } else { "FAIL" };
        let mut detail = r.notes.join("; ");
        if !r.failures.is_empty() {
            failed += 1;
            let shown: Vec<&str> = r.failures.iter().take(5).map(String::as_str).collect();
            detail = format!("{} failure(s): {}; {detail}", r.failures.len(), shown.join(" | "));
        }
        println!("criterion {} {status} {title}: {detail}", i + 1);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
