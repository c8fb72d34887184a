//! Translation of bπ into AbC. Channels travel as the first value of every
//! message; receivers filter on it with their input predicate.

use std::collections::{BTreeMap, BTreeSet};

use super::semantics::{BpiMessage, BpiState};
use super::{Bpi, BpiError, BpiName, BpiProgram};
use crate::predicates::ClosedPredicate;
use crate::semantics::Message;
use crate::terms::{AttributeEnv, Component, Defs, Expr, Predicate, Process, Value};

/// Encoder for one program. `channels` renames channels injectively;
/// unmapped channels keep their name.
#[derive(Clone, Debug)]
pub struct Encoder {
    channels: BTreeMap<String, String>,
}

#[derive(Clone, Debug)]
pub struct Encoded {
    pub defs: Defs,
    pub system: Component,
}

impl Encoder {
    pub fn new(prog: &BpiProgram, channels: BTreeMap<String, String>) -> Result<Self, BpiError> {
        let mut seen: BTreeMap<String, String> = BTreeMap::new();
        let all: BTreeSet<String> = prog.channels().into_iter().chain(channels.keys().cloned()).collect();
        for c in all {
            let image = channels.get(&c).cloned().unwrap_or_else(|| c.clone());
            if let Some(prev) = seen.insert(image, c.clone()) {
                return Err(BpiError::NonInjectiveChannelMap(prev, c));
            }
        }
        Ok(Encoder { channels })
    }

    pub fn identity() -> Self {
        Encoder { channels: BTreeMap::new() }
    }

    pub fn channel(&self, c: &str) -> String {
        self.channels.get(c).cloned().unwrap_or_else(|| c.to_string())
    }

    fn name(&self, n: &BpiName) -> Expr {
        match n {
            BpiName::Chan(c) => Expr::Const(Value::Name(self.channel(c))),
            BpiName::Var(x) => Expr::Var(x.clone()),
        }
    }

    pub fn process(&self, t: &Bpi) -> Process {
        match t {
            Bpi::Nil => Process::Nil,
            Bpi::Tau(p) => Process::output(Vec::new(), Predicate::False, self.process(p)),
            Bpi::Output { chan, args, cont } => {
                let mut vals = vec![self.name(chan)];
                vals.extend(args.iter().map(|a| self.name(a)));
                Process::output(vals, Predicate::True, self.process(cont))
            }
            Bpi::Input { chan, params, cont } => {
                let y = fresh_var(t);
                let mut vars = vec![y.clone()];
                vars.extend(params.iter().cloned());
                let pred = Predicate::eq(Expr::Var(y), self.name(chan));
                Process::input_with(pred, vars, Vec::new(), self.process(cont))
            }
            Bpi::Sum(p, q) => Process::choice(self.process(p), self.process(q)),
            Bpi::Call { name, args } => Process::Call(name.clone(), args.iter().map(|a| self.name(a)).collect()),
            Bpi::Rec { .. } => unreachable!("recursion is lifted before encoding"),
        }
    }

    /// `∅:∅` components in parallel, one per sequential term.
    pub fn state(&self, s: &BpiState) -> Component {
        let leaf = |t: &Bpi| Component::leaf(AttributeEnv::new(), &[], self.process(t));
        let mut it = s.iter().rev();
        let last = leaf(it.next().expect("non-empty state"));
        it.fold(last, |acc, t| Component::par(leaf(t), acc))
    }

    pub fn program(&self, prog: &BpiProgram) -> Encoded {
        let mut defs = Defs::new();
        for (name, d) in &prog.defs {
            defs.insert(name.clone(), d.params.clone(), self.process(&d.body));
        }
        Encoded { defs, system: self.state(&prog.components) }
    }

    pub fn message(&self, m: &BpiMessage) -> Message {
        let mut vals = vec![Value::Name(self.channel(&m.chan))];
        vals.extend(m.values.iter().map(|v| Value::Name(self.channel(v))));
        Message::new(AttributeEnv::new(), ClosedPredicate::True, vals)
    }
}

/// A variable name not used anywhere in the input prefix `t`.
fn fresh_var(t: &Bpi) -> String {
    let used = t.var_names();
    let mut y = "y".to_string();
    let mut i = 0;
    while used.contains(&y) {
        i += 1;
        y = format!("y{i}");
    }
    y
}

pub fn encode(prog: &BpiProgram) -> Encoded {
    Encoder::identity().program(prog)
}
