//! Finite labelled transition systems obtained by bounded exploration.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use crate::error::{EvalError, ExploreError};
use crate::predicates::{equiv, is_ff, ClosedPredicate, DomainContext};
use crate::semantics::{Label, Message, Semantics};
use crate::terms::{Component, Defs};

pub const DEFAULT_MAX_STATES: usize = 100_000;
pub const DEFAULT_MAX_DEPTH: usize = 1_000;
const MAX_UNIVERSE_ROUNDS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub max_states: usize,
    pub max_depth: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { max_states: DEFAULT_MAX_STATES, max_depth: DEFAULT_MAX_DEPTH }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExploreOptions {
    pub bounds: Bounds,
    /// Worker threads used to compute successors; 0 picks the rayon default.
    pub jobs: usize,
    pub strict: bool,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions { bounds: Bounds::default(), jobs: 1, strict: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub from: usize,
    pub label: usize,
    pub to: usize,
}

/// An explored transition system. State 0 is the initial state; states are
/// numbered in breadth-first discovery order with successors visited in
/// sorted order.
#[derive(Clone, Debug)]
pub struct Lts {
    pub states: Vec<Component>,
    pub labels: Vec<Label>,
    /// `tau[l]` holds when label `l` is an output with an unsatisfiable
    /// predicate.
    pub tau: Vec<bool>,
    pub transitions: Vec<Transition>,
    pub domains: DomainContext,
}

impl Lts {
    pub fn initial(&self) -> usize {
        0
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn is_tau(&self, label: usize) -> bool {
        self.tau[label]
    }

    /// Outgoing transitions per state, in transition order.
    pub fn successors(&self) -> Vec<Vec<(usize, usize)>> {
        let mut out = vec![Vec::new(); self.states.len()];
        for t in &self.transitions {
            out[t.from].push((t.label, t.to));
        }
        out
    }

    pub fn state_index(&self, c: &Component) -> Option<usize> {
        let c = c.canonical();
        self.states.iter().position(|s| *s == c)
    }
}

/// Explores `initial` with outputs and the input messages of `universe`.
pub fn explore(
    initial: &Component,
    universe: &[Message],
    defs: &Defs,
    options: &ExploreOptions,
) -> Result<Lts, ExploreError> {
    let sem = Semantics { defs, strict: options.strict };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .expect("thread pool");

    let mut states = vec![initial.canonical()];
    let mut index: HashMap<Component, usize> = HashMap::new();
    index.insert(states[0].clone(), 0);
    let mut labels: Vec<Label> = Vec::new();
    let mut label_index: HashMap<Label, usize> = HashMap::new();
    let mut transitions = Vec::new();
    let mut frontier = vec![0usize];
    let mut depth = 0;

    while !frontier.is_empty() {
        if depth >= options.bounds.max_depth {
            return Err(ExploreError::BoundExceeded { states: states.len(), depth, frontier: frontier.len() });
        }
        let batch: Vec<&Component> = frontier.iter().map(|&s| &states[s]).collect();
        let succs: Vec<Result<Vec<(Label, Component)>, EvalError>> = pool.install(|| {
            batch
                .par_iter()
                .map(|c| {
                    let steps = sem.system_steps(c, universe)?;
                    let canon: BTreeSet<(Label, Component)> =
                        steps.into_iter().map(|(l, c2)| (l, c2.canonical())).collect();
                    Ok(canon.into_iter().collect())
                })
                .collect()
        });
        let mut next = Vec::new();
        for (&from, succ) in frontier.iter().zip(succs) {
            for (label, target) in succ? {
                let l = *label_index.entry(label.clone()).or_insert_with(|| {
                    labels.push(label);
                    labels.len() - 1
                });
                let to = match index.get(&target) {
                    Some(&i) => i,
                    None => {
                        let i = states.len();
                        if i >= options.bounds.max_states {
                            return Err(ExploreError::BoundExceeded {
                                states: states.len(),
                                depth,
                                frontier: frontier.len(),
                            });
                        }
                        index.insert(target.clone(), i);
                        states.push(target);
                        next.push(i);
                        i
                    }
                };
                transitions.push(Transition { from, label: l, to });
            }
        }
        frontier = next;
        depth += 1;
    }
    transitions.sort();
    transitions.dedup();
    let domains = defs.domains.clone();
    let tau = labels
        .iter()
        .map(|l| matches!(l, Label::Output(m) if is_ff(&m.pred, &domains)))
        .collect();
    Ok(Lts { states, labels, tau, transitions, domains })
}

/// Non-silent outputs of `lts` turned into input messages, one per class of
/// equivalent messages.
pub fn harvest_outputs(lts: &Lts) -> Vec<Message> {
    let msgs: Vec<Message> = lts
        .labels
        .iter()
        .enumerate()
        .filter(|(i, l)| l.is_output() && !lts.tau[*i])
        .map(|(_, l)| l.message().clone())
        .collect();
    representatives(msgs, &lts.domains)
}

/// Keeps the least message of every equivalence class (same environment
/// and values, equivalent predicates).
pub fn representatives(msgs: impl IntoIterator<Item = Message>, domains: &DomainContext) -> Vec<Message> {
    let sorted: BTreeSet<Message> = msgs.into_iter().collect();
    let mut groups: BTreeMap<(crate::terms::AttributeEnv, Vec<crate::terms::Value>), Vec<ClosedPredicate>> =
        BTreeMap::new();
    let mut out = Vec::new();
    for m in sorted {
        let reps = groups.entry((m.env.clone(), m.values.clone())).or_default();
        if reps.iter().any(|p| equiv(p, &m.pred, domains)) {
            continue;
        }
        reps.push(m.pred.clone());
        out.push(m);
    }
    out.sort();
    out
}

/// The shared-alphabet universe of a set of systems: starting from
/// `extra`, repeatedly explore every system and add the messages they emit
/// as possible inputs until nothing new appears.
pub fn shared_alphabet(
    systems: &[&Component],
    extra: &[Message],
    defs: &Defs,
    options: &ExploreOptions,
) -> Result<Vec<Message>, ExploreError> {
    let mut universe = representatives(extra.iter().cloned(), &defs.domains);
    for _ in 0..MAX_UNIVERSE_ROUNDS {
        let mut grown: Vec<Message> = universe.clone();
        for c in systems {
            let lts = explore(c, &universe, defs, options)?;
            grown.extend(harvest_outputs(&lts));
        }
        let grown = representatives(grown, &defs.domains);
        if grown == universe {
            return Ok(universe);
        }
        universe = grown;
    }
    Err(ExploreError::UniverseDiverged(MAX_UNIVERSE_ROUNDS))
}

/// One step of the saturated relation: `⇒` for silent moves, `⇒λ⇒`
/// otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    Tau,
    Visible(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeakClosure {
    /// Reflexive-transitive silent closure of every state, sorted.
    pub tau_star: Vec<Vec<usize>>,
    /// Saturated moves per state, sorted and deduplicated. Every state has
    /// a `Tau` move to each member of its silent closure.
    pub moves: Vec<Vec<(Move, usize)>>,
}

pub fn weak_closure(lts: &Lts) -> WeakClosure {
    let n = lts.num_states();
    let mut tau_succ = vec![Vec::new(); n];
    let mut visible = vec![Vec::new(); n];
    for t in &lts.transitions {
        if lts.is_tau(t.label) {
            tau_succ[t.from].push(t.to);
        } else {
            visible[t.from].push((t.label, t.to));
        }
    }
    let tau_star: Vec<Vec<usize>> = (0..n)
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
    let moves = (0..n)
        .map(|s| {
            let mut out: BTreeSet<(Move, usize)> = tau_star[s].iter().map(|&t| (Move::Tau, t)).collect();
            for &mid in &tau_star[s] {
                for &(l, after) in &visible[mid] {
                    for &t in &tau_star[after] {
                        out.insert((Move::Visible(l), t));
                    }
                }
            }
            out.into_iter().collect()
        })
        .collect();
    WeakClosure { tau_star, moves }
}

/// `C ↪Π C'`: pairs of states linked by an output whose predicate is
/// equivalent to `pred`. With `weak`, silent steps may precede and follow.
pub fn reduction_over(lts: &Lts, pred: &ClosedPredicate, weak: bool) -> BTreeSet<(usize, usize)> {
    let matching: Vec<bool> = lts
        .labels
        .iter()
        .map(|l| matches!(l, Label::Output(m) if equiv(&m.pred, pred, &lts.domains)))
        .collect();
    let strong: BTreeSet<(usize, usize)> = lts
        .transitions
        .iter()
        .filter(|t| matching[t.label])
        .map(|t| (t.from, t.to))
        .collect();
    if !weak {
        return strong;
    }
    let closure = weak_closure(lts);
    let mut out = BTreeSet::new();
    for s in 0..lts.num_states() {
        for &mid in &closure.tau_star[s] {
            for &(a, b) in strong.range((mid, 0)..(mid + 1, 0)) {
                debug_assert_eq!(a, mid);
                for &t in &closure.tau_star[b] {
                    out.insert((s, t));
                }
            }
        }
    }
    out
}

/// Aldebaran rendering of the transition system.
pub fn export_aut(lts: &Lts) -> String {
    let mut out = format!("des (0,{},{})\n", lts.transitions.len(), lts.num_states());
    let texts: Vec<String> = lts
        .labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            if lts.tau[i] {
                "tau".to_string()
            } else {
                crate::parser::pretty::label_text(l, &lts.domains)
            }
        })
        .collect();
    for t in &lts.transitions {
        out.push_str(&format!("({},\"{}\",{})\n", t.from, texts[t.label], t.to));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::{AttributeEnv, Expr, Predicate, Process};

    fn leaf(p: Process) -> Component {
        Component::leaf(AttributeEnv::new(), &[], p)
    }

    #[test]
    fn inert_component() {
        let lts = explore(&leaf(Process::Nil), &[], &Defs::new(), &ExploreOptions::default()).unwrap();
        assert_eq!(lts.num_states(), 1);
        assert!(lts.transitions.is_empty());
        assert_eq!(export_aut(&lts), "des (0,0,1)\n");
    }

    #[test]
    fn silent_self_loop() {
        let defs = Defs::new().with("K", &[], Process::output(vec![], Predicate::False, Process::call("K", vec![])));
        let lts = explore(&leaf(Process::call("K", vec![])), &[], &defs, &ExploreOptions::default()).unwrap();
        assert_eq!(export_aut(&lts), "des (0,1,1)\n(0,\"tau\",0)\n");
    }

    #[test]
    fn bounds_are_reported() {
        let defs = Defs::new().with(
            "Count",
            &["n"],
            Process::output(
                vec![Expr::var("n")],
                Predicate::True,
                Process::call("Count", vec![Expr::op(crate::terms::Op::Add, vec![Expr::var("n"), Expr::constant(1)])]),
            ),
        );
        let opts = ExploreOptions { bounds: Bounds { max_states: 50, max_depth: 1000 }, ..Default::default() };
        let err = explore(&leaf(Process::call("Count", vec![Expr::constant(0)])), &[], &defs, &opts).unwrap_err();
        assert!(matches!(err, ExploreError::BoundExceeded { states: 50, .. }));
        let opts = ExploreOptions { bounds: Bounds { max_states: 1000, max_depth: 10 }, ..Default::default() };
        let err = explore(&leaf(Process::call("Count", vec![Expr::constant(0)])), &[], &defs, &opts).unwrap_err();
        assert!(matches!(err, ExploreError::BoundExceeded { depth: 10, .. }));
    }

    #[test]
    fn weak_closure_unfolds_silent_steps() {
        // s0 -tau-> s1 -a-> s2 -tau-> s3
        let p = Process::output(
            vec![],
            Predicate::False,
            Process::output(
                vec![Expr::constant(1)],
                Predicate::True,
                Process::output(vec![], Predicate::False, Process::Nil),
            ),
        );
        let lts = explore(&leaf(p), &[], &Defs::new(), &ExploreOptions::default()).unwrap();
        assert_eq!(lts.num_states(), 4);
        let w = weak_closure(&lts);
        let visible = lts.labels.iter().position(|l| l.message().values.len() == 1).unwrap();
        assert!(w.moves[0].contains(&(Move::Visible(visible), 3)));
        assert!(w.moves[0].contains(&(Move::Visible(visible), 2)));
        assert!(!w.moves[0].contains(&(Move::Visible(visible), 1)));
        assert_eq!(w.tau_star[0], vec![0, 1]);

        let ff = reduction_over(&lts, &ClosedPredicate::False, false);
        assert_eq!(ff, BTreeSet::from([(0, 1), (2, 3)]));
        let weak_tt = reduction_over(&lts, &ClosedPredicate::True, true);
        assert!(weak_tt.contains(&(0, 3)));
    }

    #[test]
    fn weak_closure_without_silent_steps_is_strong() {
        let p = Process::output(vec![Expr::constant(1)], Predicate::True, Process::Nil);
        let lts = explore(&leaf(p), &[], &Defs::new(), &ExploreOptions::default()).unwrap();
        let w = weak_closure(&lts);
        let visible: Vec<_> = w.moves[0].iter().filter(|(m, _)| *m != Move::Tau).collect();
        assert_eq!(visible, vec![&(Move::Visible(0), 1)]);
    }
}
