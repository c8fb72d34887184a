//! Strong and weak bisimilarity over explored transition systems, with
//! distinguishing formulas as witnesses.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use sha2::{Digest, Sha256};

use crate::error::ExploreError;
use crate::lts::{explore, export_aut, shared_alphabet, weak_closure, ExploreOptions, Lts, Move};
use crate::parser::pretty::{label_text, message_text, Quote};
use crate::predicates::{equiv, is_ff, normalize, ClosedPredicate, DomainContext};
use crate::semantics::{Label, Message};
use crate::terms::{Component, Defs};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Strong,
    Weak,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Strong => "strong",
            Mode::Weak => "weak",
        }
    }
}

/// Label equality up to predicate equivalence. Outputs with unsatisfiable
/// predicates are all the same silent label.
pub fn label_equiv(a: &Label, b: &Label, domains: &DomainContext) -> bool {
    let same_msg = |m1: &Message, m2: &Message| {
        m1.env == m2.env && m1.values == m2.values && equiv(&m1.pred, &m2.pred, domains)
    };
    match (a, b) {
        (Label::Output(m1), Label::Output(m2)) => {
            let (f1, f2) = (is_ff(&m1.pred, domains), is_ff(&m2.pred, domains));
            if f1 || f2 {
                f1 && f2
            } else {
                same_msg(m1, m2)
            }
        }
        (Label::Input(m1), Label::Input(m2)) | (Label::Discard(m1), Label::Discard(m2)) => same_msg(m1, m2),
        _ => false,
    }
}

/// A transition graph over label classes, the input of the refinement.
#[derive(Clone, Debug, Default)]
pub struct ClassGraph {
    pub num_states: usize,
    /// `(from, class, to)`
    pub transitions: Vec<(usize, usize, usize)>,
    /// The class of silent moves, if any.
    pub tau_class: Option<usize>,
}

impl ClassGraph {
    fn moves(&self, mode: Mode) -> Vec<Vec<(Move, usize)>> {
        let mv = |c: usize| if Some(c) == self.tau_class { Move::Tau } else { Move::Visible(c) };
        let mut strong = vec![Vec::new(); self.num_states];
        for &(f, c, t) in &self.transitions {
            strong[f].push((mv(c), t));
        }
        if mode == Mode::Strong {
            for m in &mut strong {
                m.sort();
                m.dedup();
            }
            return strong;
        }
        let mut tau_succ = vec![Vec::new(); self.num_states];
        for (s, ms) in strong.iter().enumerate() {
            for &(m, t) in ms {
                if m == Move::Tau {
                    tau_succ[s].push(t);
                }
            }
        }
        let tau_star: Vec<Vec<usize>> = (0..self.num_states)
            .map(|s| {
                let mut seen = BTreeSet::from([s]);
                let mut stack = vec![s];
                while let Some(x) = stack.pop() {
                    for &y in &tau_succ[x] {
                        if seen.insert(y) {
                            stack.push(y);
                        }
                    }
                }
                seen.into_iter().collect()
            })
            .collect();
        (0..self.num_states)
            .map(|s| {
                let mut out: BTreeSet<(Move, usize)> = tau_star[s].iter().map(|&t| (Move::Tau, t)).collect();
                for &mid in &tau_star[s] {
                    for &(m, after) in &strong[mid] {
                        if m != Move::Tau {
                            for &t in &tau_star[after] {
                                out.insert((m, t));
                            }
                        }
                    }
                }
                out.into_iter().collect()
            })
            .collect()
    }
}

/// Distinguishing formula over class moves.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula<S> {
    True,
    Diamond(S, Box<Formula<S>>),
    And(Vec<Formula<S>>),
    Not(Box<Formula<S>>),
}

impl<S: Clone> Formula<S> {
    pub fn map<T>(&self, f: &impl Fn(&S) -> T) -> Formula<T> {
        match self {
            Formula::True => Formula::True,
            Formula::Diamond(s, b) => Formula::Diamond(f(s), Box::new(b.map(f))),
            Formula::And(v) => Formula::And(v.iter().map(|x| x.map(f)).collect()),
            Formula::Not(b) => Formula::Not(Box::new(b.map(f))),
        }
    }

    /// Modal depth.
    pub fn depth(&self) -> usize {
        match self {
            Formula::True => 0,
            Formula::Diamond(_, b) => 1 + b.depth(),
            Formula::And(v) => v.iter().map(Formula::depth).max().unwrap_or(0),
            Formula::Not(b) => b.depth(),
        }
    }

    /// Evaluates the formula at `s`, given the move relation.
    pub fn holds(&self, s: usize, succ: &impl Fn(usize, &S) -> Vec<usize>) -> bool {
        match self {
            Formula::True => true,
            Formula::Diamond(m, b) => succ(s, m).into_iter().any(|t| b.holds(t, succ)),
            Formula::And(v) => v.iter().all(|x| x.holds(s, succ)),
            Formula::Not(b) => !b.holds(s, succ),
        }
    }
}

/// Result of partition refinement on a graph.
pub struct Refinement {
    /// `history[r][s]`: block of `s` after `r` rounds. The last entry is
    /// the coarsest bisimulation.
    pub history: Vec<Vec<usize>>,
    moves: Vec<Vec<(Move, usize)>>,
}

type Signature = (usize, Vec<(Move, usize)>);

fn signature(moves: &[(Move, usize)], part: &[usize], own: usize) -> Signature {
    let mut sig: Vec<(Move, usize)> = moves.iter().map(|&(m, t)| (m, part[t])).collect();
    sig.sort();
    sig.dedup();
    (own, sig)
}

pub fn refine(graph: &ClassGraph, mode: Mode) -> Refinement {
    let moves = graph.moves(mode);
    let n = graph.num_states;
    let mut history = vec![vec![0usize; n]];
    let mut blocks = usize::from(n > 0);
    loop {
        let part = history.last().unwrap();
        let sigs: Vec<Signature> = (0..n).map(|s| signature(&moves[s], part, part[s])).collect();
        let ids: BTreeMap<&Signature, usize> =
            sigs.iter().collect::<BTreeSet<_>>().into_iter().enumerate().map(|(i, s)| (s, i)).collect();
        let next: Vec<usize> = sigs.iter().map(|s| ids[s]).collect();
        let count = ids.len();
        if count == blocks {
            return Refinement { history, moves };
        }
        blocks = count;
        history.push(next);
    }
}

impl Refinement {
    pub fn equivalent(&self, s: usize, t: usize) -> bool {
        let last = self.history.last().unwrap();
        last[s] == last[t]
    }

    fn succ(&self, s: usize, m: Move) -> Vec<usize> {
        self.moves[s].iter().filter(|(mm, _)| *mm == m).map(|&(_, t)| t).collect()
    }

    /// A formula true at `s` and false at `t`, built from the earliest round
    /// separating them; ties go to the smaller move, then to `s`.
    pub fn distinguish(&self, s: usize, t: usize) -> Option<Formula<Move>> {
        if self.equivalent(s, t) {
            return None;
        }
        let mut memo = HashMap::new();
        Some(self.formula(s, t, &mut memo))
    }

    fn formula(&self, s: usize, t: usize, memo: &mut HashMap<(usize, usize), Formula<Move>>) -> Formula<Move> {
        if let Some(f) = memo.get(&(s, t)) {
            return f.clone();
        }
        let k = (1..self.history.len()).find(|&r| self.history[r][s] != self.history[r][t]).expect("separated");
        let prev = &self.history[k - 1];
        let sig_s: BTreeSet<(Move, usize)> = self.moves[s].iter().map(|&(m, x)| (m, prev[x])).collect();
        let sig_t: BTreeSet<(Move, usize)> = self.moves[t].iter().map(|&(m, x)| (m, prev[x])).collect();
        let left = sig_s.difference(&sig_t).next().copied();
        let right = sig_t.difference(&sig_s).next().copied();
        let (from_s, (m, blk)) = match (left, right) {
            (Some(a), Some(b)) if b.0 < a.0 => (false, b),
            (Some(a), _) => (true, a),
            (None, Some(b)) => (false, b),
            (None, None) => unreachable!("signatures differ at the separating round"),
        };
        let (p, q) = if from_s { (s, t) } else { (t, s) };
        let p2 = *self.succ(p, m).iter().filter(|&&x| prev[x] == blk).min().expect("witness move");
        let mut conj: Vec<Formula<Move>> = Vec::new();
        for q2 in self.succ(q, m) {
            let f = self.formula(p2, q2, memo);
            if !conj.contains(&f) {
                conj.push(f);
            }
        }
        let body = match conj.len() {
            0 => Formula::True,
            1 => conj.pop().unwrap(),
            _ => Formula::And(conj),
        };
        let dia = Formula::Diamond(m, Box::new(body));
        let f = if from_s { dia } else { Formula::Not(Box::new(dia)) };
        memo.insert((s, t), f.clone());
        f
    }
}

/// A step of a witness formula over AbC labels.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Step {
    Tau,
    Label(Label),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub mode: Mode,
    pub equivalent: bool,
    /// Holds in the left initial state and fails in the right one.
    pub witness: Option<Formula<Step>>,
    /// Shortest weak (or strong) trace of one side that the other side
    /// cannot perform, when the trace sets differ.
    pub trace: Option<Trace>,
    pub universe: Vec<Message>,
    pub left_states: usize,
    pub right_states: usize,
    pub fingerprint: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    /// Whether the trace belongs to the left system.
    pub left: bool,
    pub steps: Vec<Step>,
}

/// Outcome of [`compare`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub equivalent: bool,
    pub witness: Option<Formula<Step>>,
    pub trace: Option<Trace>,
}

const TRACE_SEARCH_LIMIT: usize = 200_000;

/// Breadth-first search for a move sequence from `p0` with no counterpart
/// from `q0`, over the subset construction of the `q` side. Nodes are
/// expanded in order, so the first hit is the shortest sequence and the
/// smallest among those.
fn missing_trace(moves: &[Vec<(Move, usize)>], p0: usize, q0: usize, weak: bool) -> Option<Vec<Move>> {
    let succ = |s: usize, m: Move| moves[s].iter().filter(move |(mm, _)| *mm == m).map(|&(_, t)| t);
    let mut nodes: Vec<((usize, Vec<usize>), Option<(usize, Move)>)> = vec![((p0, vec![q0]), None)];
    let mut seen: BTreeSet<(usize, Vec<usize>)> = BTreeSet::from([(p0, vec![q0])]);
    let mut head = 0;
    while head < nodes.len() && nodes.len() < TRACE_SEARCH_LIMIT {
        let (p, qs) = nodes[head].0.clone();
        let mut ms: Vec<Move> = moves[p].iter().map(|&(m, _)| m).filter(|m| !(weak && *m == Move::Tau)).collect();
        ms.dedup();
        for m in ms {
            let next_qs: Vec<usize> =
                qs.iter().flat_map(|&q| succ(q, m)).collect::<BTreeSet<_>>().into_iter().collect();
            if next_qs.is_empty() {
                let mut path = vec![m];
                let mut at = head;
                while let Some((prev, mv)) = nodes[at].1 {
                    path.push(mv);
                    at = prev;
                }
                path.reverse();
                return Some(path);
            }
            for p2 in succ(p, m) {
                let key = (p2, next_qs.clone());
                if seen.insert(key.clone()) {
                    nodes.push((key, Some((head, m))));
                }
            }
        }
        head += 1;
    }
    None
}

/// Joint label classes of two transition systems: `(classes of left
/// labels, classes of right labels, representatives, silent class)`.
fn label_classes(l: &Lts, r: &Lts, domains: &DomainContext) -> (Vec<usize>, Vec<usize>, Vec<Label>, Option<usize>) {
    let all: BTreeSet<&Label> = l.labels.iter().chain(&r.labels).collect();
    let mut reps: Vec<Label> = Vec::new();
    let mut tau_class = None;
    let mut class_of: HashMap<&Label, usize> = HashMap::new();
    // bucket by kind, environment and values before comparing predicates
    let mut buckets: BTreeMap<(u8, &crate::terms::AttributeEnv, &Vec<crate::terms::Value>), Vec<usize>> =
        BTreeMap::new();
    for lab in all {
        let m = lab.message();
        if lab.is_output() && is_ff(&m.pred, domains) {
            let c = *tau_class.get_or_insert_with(|| {
                reps.push(lab.clone());
                reps.len() - 1
            });
            class_of.insert(lab, c);
            continue;
        }
        let kind = match lab {
            Label::Output(_) => 0,
            Label::Input(_) => 1,
            Label::Discard(_) => 2,
        };
        let bucket = buckets.entry((kind, &m.env, &m.values)).or_default();
        let found = bucket.iter().copied().find(|&c| equiv(&reps[c].message().pred, &m.pred, domains));
        let c = found.unwrap_or_else(|| {
            reps.push(lab.clone());
            bucket.push(reps.len() - 1);
            reps.len() - 1
        });
        class_of.insert(lab, c);
    }
    let lc = l.labels.iter().map(|x| class_of[x]).collect();
    let rc = r.labels.iter().map(|x| class_of[x]).collect();
    (lc, rc, reps, tau_class)
}

fn merged_domains(l: &Lts, r: &Lts) -> DomainContext {
    let mut d = l.domains.clone();
    // conflicting declarations were rejected when the definitions merged
    let _ = d.merge(&r.domains);
    d
}

/// Compares two explored systems.
pub fn compare(l: &Lts, r: &Lts, mode: Mode) -> Comparison {
    let domains = merged_domains(l, r);
    let (lc, rc, reps, tau_class) = label_classes(l, r, &domains);
    let off = l.num_states();
    let mut graph = ClassGraph { num_states: off + r.num_states(), transitions: Vec::new(), tau_class };
    for t in &l.transitions {
        graph.transitions.push((t.from, lc[t.label], t.to));
    }
    for t in &r.transitions {
        graph.transitions.push((t.from + off, rc[t.label], t.to + off));
    }
    let refinement = refine(&graph, mode);
    let step = |m: &Move| match m {
        Move::Tau => Step::Tau,
        Move::Visible(c) => Step::Label(reps[*c].clone()),
    };
    let (s0, t0) = (l.initial(), off + r.initial());
    let witness = refinement.distinguish(s0, t0).map(|f| f.map(&step));
    let trace = witness.as_ref().and_then(|_| {
        let weak = mode == Mode::Weak;
        let from_left = missing_trace(&refinement.moves, s0, t0, weak);
        let from_right = missing_trace(&refinement.moves, t0, s0, weak);
        let (left, path) = match (from_left, from_right) {
            (Some(a), Some(b)) if (b.len(), &b) < (a.len(), &a) => (false, b),
            (Some(a), _) => (true, a),
            (None, Some(b)) => (false, b),
            (None, None) => return None,
        };
        Some(Trace { left, steps: path.iter().map(step).collect() })
    });
    Comparison { equivalent: witness.is_none(), witness, trace }
}

fn fingerprint(mode: Mode, equivalent: bool, universe: &[Message], l: &Lts, r: &Lts) -> String {
    let mut h = Sha256::new();
    h.update(mode.name());
    h.update([u8::from(equivalent)]);
    for m in universe {
        h.update(message_text(m, Quote::Single));
        h.update("\n");
    }
    h.update(export_aut(l));
    h.update(export_aut(r));
    hex::encode(h.finalize())[..16].to_string()
}

/// Explores both systems over their shared alphabet (seeded with `extra`)
/// and decides bisimilarity.
pub fn check(
    left: &Component,
    right: &Component,
    defs: &Defs,
    extra: &[Message],
    options: &ExploreOptions,
    mode: Mode,
) -> Result<Verdict, ExploreError> {
    defs.validate()?;
    defs.validate_component(left)?;
    defs.validate_component(right)?;
    let universe = shared_alphabet(&[left, right], extra, defs, options)?;
    let l = explore(left, &universe, defs, options)?;
    let r = explore(right, &universe, defs, options)?;
    Ok(verdict(&l, &r, universe, mode))
}

/// Builds a verdict from two systems explored over `universe`.
pub fn verdict(l: &Lts, r: &Lts, universe: Vec<Message>, mode: Mode) -> Verdict {
    let Comparison { equivalent, witness, trace } = compare(l, r, mode);
    let fingerprint = fingerprint(mode, equivalent, &universe, l, r);
    Verdict {
        mode,
        equivalent,
        witness,
        trace,
        universe,
        left_states: l.num_states(),
        right_states: r.num_states(),
        fingerprint,
    }
}

pub fn strong_bisim(left: &Component, right: &Component, defs: &Defs, extra: &[Message], options: &ExploreOptions) -> Result<Verdict, ExploreError> {
    check(left, right, defs, extra, options, Mode::Strong)
}

pub fn weak_bisim(left: &Component, right: &Component, defs: &Defs, extra: &[Message], options: &ExploreOptions) -> Result<Verdict, ExploreError> {
    check(left, right, defs, extra, options, Mode::Weak)
}

/// Successor function of `lts` for witness steps, matching labels up to
/// `label_equiv`.
fn step_successors<'a>(lts: &'a Lts, mode: Mode) -> impl Fn(usize, &Step) -> Vec<usize> + 'a {
    let strong = lts.successors();
    let closure = (mode == Mode::Weak).then(|| weak_closure(lts));
    move |s: usize, step: &Step| {
        let matches = |l: usize| match step {
            Step::Tau => lts.is_tau(l),
            Step::Label(lab) => !lts.is_tau(l) && label_equiv(lab, &lts.labels[l], &lts.domains),
        };
        let mut out: Vec<usize> = match &closure {
            None => strong[s].iter().filter(|(l, _)| matches(*l)).map(|&(_, t)| t).collect(),
            Some(c) => c.moves[s]
                .iter()
                .filter(|(m, _)| match (m, step) {
                    (Move::Tau, Step::Tau) => true,
                    (Move::Visible(l), Step::Label(_)) => matches(*l),
                    _ => false,
                })
                .map(|&(_, t)| t)
                .collect(),
        };
        out.sort();
        out.dedup();
        out
    }
}

impl Verdict {
    /// Re-checks the witness directly on the two systems: it must hold in
    /// the left initial state and fail in the right one. Equivalent
    /// verdicts replay trivially.
    pub fn replay(&self, left: &Lts, right: &Lts) -> bool {
        let formula_ok = match &self.witness {
            None => self.equivalent,
            Some(f) => {
                f.holds(left.initial(), &step_successors(left, self.mode))
                    && !f.holds(right.initial(), &step_successors(right, self.mode))
            }
        };
        let trace_ok = match &self.trace {
            None => true,
            Some(t) => {
                let (own, other) = if t.left { (left, right) } else { (right, left) };
                !self.equivalent && performs(own, &t.steps, self.mode) && !performs(other, &t.steps, self.mode)
            }
        };
        formula_ok && trace_ok
    }
}

fn performs(lts: &Lts, steps: &[Step], mode: Mode) -> bool {
    let succ = step_successors(lts, mode);
    let mut current = vec![lts.initial()];
    for st in steps {
        let next: BTreeSet<usize> = current.iter().flat_map(|&s| succ(s, st)).collect();
        current = next.into_iter().collect();
    }
    !current.is_empty()
}

pub fn trace_text(t: &Trace, domains: &DomainContext) -> String {
    let steps: Vec<String> = t
        .steps
        .iter()
        .map(|s| match s {
            Step::Tau => "tau".to_string(),
            Step::Label(l) => label_text(l, domains),
        })
        .collect();
    steps.join("; ")
}

pub fn formula_text(f: &Formula<Step>, domains: &DomainContext) -> String {
    match f {
        Formula::True => "tt".into(),
        Formula::Diamond(s, b) => {
            let step = match s {
                Step::Tau => "tau".to_string(),
                Step::Label(l) => label_text(l, domains),
            };
            format!("<{step}>{}", formula_text(b, domains))
        }
        Formula::And(v) => {
            let parts: Vec<String> = v.iter().map(|x| formula_text(x, domains)).collect();
            format!("({})", parts.join(" & "))
        }
        Formula::Not(b) => format!("!{}", formula_text(b, domains)),
    }
}

/// Output predicates available at `state`, normalised and without
/// duplicates up to equivalence. Silent outputs are not barbs.
pub fn barbs(lts: &Lts, state: usize) -> Vec<ClosedPredicate> {
    let mut out: Vec<ClosedPredicate> = Vec::new();
    for t in lts.transitions.iter().filter(|t| t.from == state) {
        if let Label::Output(m) = &lts.labels[t.label] {
            if lts.is_tau(t.label) {
                continue;
            }
            if !out.iter().any(|p| equiv(p, &m.pred, &lts.domains)) {
                out.push(normalize(&m.pred, &lts.domains));
            }
        }
    }
    out.sort();
    out
}

/// Barbs reachable through silent moves.
pub fn weak_barbs(lts: &Lts, state: usize) -> Vec<ClosedPredicate> {
    let closure = weak_closure(lts);
    let mut out: Vec<ClosedPredicate> = Vec::new();
    for &s in &closure.tau_star[state] {
        for p in barbs(lts, s) {
            if !out.iter().any(|q| equiv(q, &p, &lts.domains)) {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}
