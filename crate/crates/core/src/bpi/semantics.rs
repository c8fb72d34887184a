//! Labelled semantics of bπ with broadcast communication: an output reaches
//! every parallel component; a component without a matching input ignores
//! it and stays put.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{Bpi, BpiError, BpiName, BpiProgram};
use crate::equivalence::{refine, ClassGraph, Mode};

/// A broadcast message `a<ṽ>`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BpiMessage {
    pub chan: String,
    pub values: Vec<String>,
}

impl BpiMessage {
    pub fn new(chan: &str, values: &[&str]) -> Self {
        BpiMessage { chan: chan.into(), values: values.iter().map(|v| v.to_string()).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BpiLabel {
    Tau,
    Out(BpiMessage),
    In(BpiMessage),
}

/// A state: one sequential term per parallel component.
pub type BpiState = Vec<Bpi>;

fn chan_of(n: &BpiName) -> Result<String, BpiError> {
    match n {
        BpiName::Chan(c) => Ok(c.clone()),
        BpiName::Var(x) => Err(BpiError::FreeVariable(x.clone())),
    }
}

impl BpiProgram {
    fn unfold(&self, name: &str, args: &[BpiName]) -> Result<Bpi, BpiError> {
        let def = self.defs.get(name).ok_or_else(|| BpiError::UnknownRecursion(name.to_string()))?;
        let mut sigma = BTreeMap::new();
        for (x, a) in def.params.iter().zip(args) {
            sigma.insert(x.clone(), chan_of(a)?);
        }
        Ok(def.body.subst(&sigma))
    }

    /// Silent moves and outputs of a sequential term; `None` marks τ.
    pub fn seq_outputs(&self, t: &Bpi) -> Result<Vec<(Option<BpiMessage>, Bpi)>, BpiError> {
        Ok(match t {
            Bpi::Nil | Bpi::Input { .. } => Vec::new(),
            Bpi::Tau(p) => vec![(None, (**p).clone())],
            Bpi::Output { chan, args, cont } => {
                let values = args.iter().map(chan_of).collect::<Result<Vec<_>, _>>()?;
                vec![(Some(BpiMessage { chan: chan_of(chan)?, values }), (**cont).clone())]
            }
            Bpi::Sum(p, q) => {
                let mut v = self.seq_outputs(p)?;
                v.extend(self.seq_outputs(q)?);
                v
            }
            Bpi::Call { name, args } => self.seq_outputs(&self.unfold(name, args)?)?,
            Bpi::Rec { .. } => unreachable!("states never contain rec"),
        })
    }

    /// Derivatives of a sequential term receiving `m`; empty when it
    /// discards the message.
    pub fn seq_inputs(&self, t: &Bpi, m: &BpiMessage) -> Result<Vec<Bpi>, BpiError> {
        Ok(match t {
            Bpi::Nil | Bpi::Tau(_) | Bpi::Output { .. } => Vec::new(),
            Bpi::Input { chan, params, cont } => {
                if chan_of(chan)? != m.chan || params.len() != m.values.len() {
                    Vec::new()
                } else {
                    let sigma: BTreeMap<String, String> = params.iter().cloned().zip(m.values.iter().cloned()).collect();
                    vec![cont.subst(&sigma)]
                }
            }
            Bpi::Sum(p, q) => {
                let mut v = self.seq_inputs(p, m)?;
                v.extend(self.seq_inputs(q, m)?);
                v
            }
            Bpi::Call { name, args } => self.seq_inputs(&self.unfold(name, args)?, m)?,
            Bpi::Rec { .. } => unreachable!("states never contain rec"),
        })
    }

    /// Reactions of the components `skip` excluded to `m`: the product of
    /// every component's derivatives, a discarding component staying as is.
    fn react(&self, state: &BpiState, skip: Option<usize>, m: &BpiMessage) -> Result<Vec<BpiState>, BpiError> {
        let mut acc: Vec<BpiState> = vec![state.clone()];
        for (j, t) in state.iter().enumerate() {
            if Some(j) == skip {
                continue;
            }
            let resp = self.seq_inputs(t, m)?;
            if resp.is_empty() {
                continue;
            }
            acc = acc
                .into_iter()
                .flat_map(|s| {
                    resp.iter().map(move |r| {
                        let mut s = s.clone();
                        s[j] = r.clone();
                        s
                    })
                })
                .collect();
        }
        Ok(acc)
    }

    /// Whether every component discards `m`.
    pub fn discards(&self, state: &BpiState, m: &BpiMessage) -> Result<bool, BpiError> {
        for t in state {
            if !self.seq_inputs(t, m)?.is_empty() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Output and silent transitions of a state.
    pub fn out_steps(&self, state: &BpiState) -> Result<Vec<(BpiLabel, BpiState)>, BpiError> {
        let mut out = BTreeSet::new();
        for (i, t) in state.iter().enumerate() {
            for (m, t2) in self.seq_outputs(t)? {
                let mut s = state.clone();
                s[i] = t2;
                match m {
                    None => {
                        out.insert((BpiLabel::Tau, s));
                    }
                    Some(m) => {
                        for r in self.react(&s, Some(i), &m)? {
                            out.insert((BpiLabel::Out(m.clone()), r));
                        }
                    }
                }
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Response of the whole state to an external message.
    pub fn in_steps(&self, state: &BpiState, m: &BpiMessage) -> Result<Vec<BpiState>, BpiError> {
        let mut r = self.react(state, None, m)?;
        r.sort();
        r.dedup();
        Ok(r)
    }

    /// Channels on which the state can output right away.
    pub fn barbs(&self, state: &BpiState) -> Result<BTreeSet<String>, BpiError> {
        let mut out = BTreeSet::new();
        for t in state {
            for (m, _) in self.seq_outputs(t)? {
                if let Some(m) = m {
                    out.insert(m.chan);
                }
            }
        }
        Ok(out)
    }

    pub fn initial_state(&self) -> BpiState {
        self.components.iter().map(Bpi::canonical).collect()
    }
}

pub fn canonical_state(s: &BpiState) -> BpiState {
    s.iter().map(Bpi::canonical).collect()
}

#[derive(Clone, Debug)]
pub struct BpiLts {
    pub states: Vec<BpiState>,
    pub labels: Vec<BpiLabel>,
    /// `(from, label, to)`, sorted.
    pub transitions: Vec<(usize, usize, usize)>,
}

/// Breadth-first exploration with the given external messages.
pub fn explore_bpi(prog: &BpiProgram, universe: &[BpiMessage], max_states: usize) -> Result<BpiLts, BpiError> {
    let mut states = vec![prog.initial_state()];
    let mut index: HashMap<BpiState, usize> = HashMap::from([(states[0].clone(), 0)]);
    let mut labels: Vec<BpiLabel> = Vec::new();
    let mut label_index: HashMap<BpiLabel, usize> = HashMap::new();
    let mut transitions = BTreeSet::new();
    let mut next = 0;
    while next < states.len() {
        let s = states[next].clone();
        let mut succ: Vec<(BpiLabel, BpiState)> = prog.out_steps(&s)?;
        for m in universe {
            for r in prog.in_steps(&s, m)? {
                succ.push((BpiLabel::In(m.clone()), r));
            }
        }
        for (l, t) in succ {
            let t = canonical_state(&t);
            let to = match index.get(&t) {
                Some(&i) => i,
                None => {
                    if states.len() >= max_states {
                        return Err(BpiError::BoundExceeded(states.len()));
                    }
                    states.push(t.clone());
                    index.insert(t, states.len() - 1);
                    states.len() - 1
                }
            };
            let li = *label_index.entry(l.clone()).or_insert_with(|| {
                labels.push(l);
                labels.len() - 1
            });
            transitions.insert((next, li, to));
        }
        next += 1;
    }
    Ok(BpiLts { states, labels, transitions: transitions.into_iter().collect() })
}

fn collect_probes(t: &Bpi, out: &mut BTreeSet<BpiMessage>) {
    match t {
        Bpi::Nil | Bpi::Call { .. } => {}
        Bpi::Input { chan, params, cont } => {
            if let BpiName::Chan(c) = chan {
                out.insert(BpiMessage { chan: c.clone(), values: vec![c.clone(); params.len()] });
            }
            collect_probes(cont, out);
        }
        Bpi::Tau(p) | Bpi::Output { cont: p, .. } => collect_probes(p, out),
        Bpi::Sum(p, q) => {
            collect_probes(p, out);
            collect_probes(q, out);
        }
        Bpi::Rec { body, .. } => collect_probes(body, out),
    }
}

impl BpiProgram {
    /// One external message per input prefix on a free channel, carrying
    /// that channel in every position.
    pub fn input_probes(&self) -> BTreeSet<BpiMessage> {
        let mut out = BTreeSet::new();
        for t in &self.source {
            collect_probes(t, &mut out);
        }
        out
    }
}

/// The input probes of the programs plus every message they can emit when
/// fed with the universe so far, iterated to a fixpoint.
pub fn bpi_universe(progs: &[&BpiProgram], max_states: usize) -> Result<Vec<BpiMessage>, BpiError> {
    let mut universe: BTreeSet<BpiMessage> = progs.iter().flat_map(|p| p.input_probes()).collect();
    loop {
        let current: Vec<BpiMessage> = universe.iter().cloned().collect();
        let mut grown = universe.clone();
        for p in progs {
            let lts = explore_bpi(p, &current, max_states)?;
            for l in &lts.labels {
                if let BpiLabel::Out(m) = l {
                    grown.insert(m.clone());
                }
            }
        }
        if grown == universe {
            return Ok(current);
        }
        universe = grown;
    }
}

/// Bisimilarity of two programs over the closure of their joint outputs.
/// Labels match exactly; τ is the silent move.
pub fn bpi_bisimilar(p: &BpiProgram, q: &BpiProgram, mode: Mode, max_states: usize) -> Result<bool, BpiError> {
    let universe = bpi_universe(&[p, q], max_states)?;
    let lp = explore_bpi(p, &universe, max_states)?;
    let lq = explore_bpi(q, &universe, max_states)?;
    let classes: BTreeMap<&BpiLabel, usize> =
        lp.labels.iter().chain(&lq.labels).collect::<BTreeSet<_>>().into_iter().enumerate().map(|(i, l)| (l, i)).collect();
    let off = lp.states.len();
    let mut graph = ClassGraph {
        num_states: off + lq.states.len(),
        transitions: Vec::new(),
        tau_class: classes.get(&BpiLabel::Tau).copied(),
    };
    for &(f, l, t) in &lp.transitions {
        graph.transitions.push((f, classes[&lp.labels[l]], t));
    }
    for &(f, l, t) in &lq.transitions {
        graph.transitions.push((f + off, classes[&lq.labels[l]], t + off));
    }
    Ok(refine(&graph, mode).equivalent(0, off))
}
