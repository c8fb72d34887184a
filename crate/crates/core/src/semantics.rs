//! Transition relations of components and systems.
//!
//! Component-level steps enumerate the outputs a leaf can perform and the
//! ways it can react to an incoming message. System-level steps lift them
//! through parallel composition (broadcast delivery to every sibling) and
//! the two restriction operators.

use std::collections::BTreeSet;

use crate::error::EvalError;
use crate::predicates::{close, close_in_scope, satisfies, substitute_pred, ClosedPredicate, ClosureScope};
use crate::terms::{
    apply_updates, eval_expr, restrict_env, subst_updates, AttributeEnv, Component, Defs, Interface, Process,
    RestrictionFn, Subst, Value,
};

/// What travels on a transition: the sender's exposed environment, the
/// (closed) sending predicate and the transmitted values.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Message {
    pub env: AttributeEnv,
    pub pred: ClosedPredicate,
    pub values: Vec<Value>,
}

impl Message {
    pub fn new(env: AttributeEnv, pred: ClosedPredicate, values: Vec<Value>) -> Self {
        Message { env, pred, values }
    }

    fn with_pred(&self, pred: ClosedPredicate) -> Self {
        Message { env: self.env.clone(), pred, values: self.values.clone() }
    }
}

/// Transition labels. `Discard` only occurs on component-level reactions;
/// at system level a discarded message shows up as an ordinary input.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Output(Message),
    Input(Message),
    Discard(Message),
}

impl Label {
    pub fn message(&self) -> &Message {
        match self {
            Label::Output(m) | Label::Input(m) | Label::Discard(m) => m,
        }
    }

    pub fn is_output(&self) -> bool {
        matches!(self, Label::Output(_))
    }
}

/// Static context of the transition relation.
#[derive(Clone, Copy, Debug)]
pub struct Semantics<'a> {
    pub defs: &'a Defs,
    /// Turn evaluation failures into errors instead of dropping the
    /// offending branch.
    pub strict: bool,
}

impl<'a> Semantics<'a> {
    pub fn new(defs: &'a Defs) -> Self {
        Semantics { defs, strict: false }
    }

    pub fn strict(defs: &'a Defs) -> Self {
        Semantics { defs, strict: true }
    }

    fn recover<T>(&self, r: Result<T, EvalError>) -> Result<Option<T>, EvalError> {
        match r {
            Ok(v) => Ok(Some(v)),
            Err(e) if self.strict => Err(e),
            Err(_) => Ok(None),
        }
    }

    fn unfold(&self, name: &str, args: &[crate::terms::Expr], env: &AttributeEnv) -> Result<Process, EvalError> {
        let def = self.defs.get(name).ok_or_else(|| EvalError::UnknownProcess(name.to_string()))?;
        let vals = args.iter().map(|a| eval_expr(a, env, &Subst::new())).collect::<Result<Vec<_>, _>>()?;
        def.body.substitute(&def.params, &vals)
    }

    /// Output moves of a process running in `env`: the message and the
    /// resulting environment and continuation.
    pub fn process_outputs(
        &self,
        env: &AttributeEnv,
        iface: &Interface,
        proc: &Process,
    ) -> Result<Vec<(Message, AttributeEnv, Process)>, EvalError> {
        let mut out = Vec::new();
        self.outputs_into(env, iface, proc, &mut out)?;
        Ok(out)
    }

    fn outputs_into(
        &self,
        env: &AttributeEnv,
        iface: &Interface,
        proc: &Process,
        out: &mut Vec<(Message, AttributeEnv, Process)>,
    ) -> Result<(), EvalError> {
        match proc {
            Process::Nil | Process::Input { .. } => {}
            Process::Output { args, pred, updates, cont } => {
                let step = || -> Result<(Message, AttributeEnv), EvalError> {
                    let values = args.iter().map(|e| eval_expr(e, env, &Subst::new())).collect::<Result<Vec<_>, _>>()?;
                    let closed = close(pred, env)?;
                    let next = apply_updates(env, updates, &self.defs.domains)?;
                    Ok((Message::new(restrict_env(env, iface), closed, values), next))
                };
                if let Some((msg, next)) = self.recover(step())? {
                    out.push((msg, next, (**cont).clone()));
                }
            }
            Process::Aware(guard, p) => {
                if let Some(g) = self.recover(close(guard, env))? {
                    if satisfies(env, &g) {
                        self.outputs_into(env, iface, p, out)?;
                    }
                }
            }
            Process::Choice(p, q) => {
                self.outputs_into(env, iface, p, out)?;
                self.outputs_into(env, iface, q, out)?;
            }
            Process::Par(p, q) => {
                let mut left = Vec::new();
                self.outputs_into(env, iface, p, &mut left)?;
                out.extend(left.into_iter().map(|(m, g, p2)| (m, g, Process::par(p2, (**q).clone()))));
                let mut right = Vec::new();
                self.outputs_into(env, iface, q, &mut right)?;
                out.extend(right.into_iter().map(|(m, g, q2)| (m, g, Process::par((**p).clone(), q2))));
            }
            Process::Call(k, args) => {
                if let Some(body) = self.recover(self.unfold(k, args, env))? {
                    self.outputs_into(env, iface, &body, out)?;
                }
            }
        }
        Ok(())
    }

    /// Ways a process running in `env` can accept `msg`. Empty means the
    /// message is discarded.
    pub fn process_inputs(
        &self,
        env: &AttributeEnv,
        iface: &Interface,
        proc: &Process,
        msg: &Message,
    ) -> Result<Vec<(AttributeEnv, Process)>, EvalError> {
        let mut out = Vec::new();
        self.inputs_into(env, iface, proc, msg, &mut out)?;
        Ok(out)
    }

    fn inputs_into(
        &self,
        env: &AttributeEnv,
        iface: &Interface,
        proc: &Process,
        msg: &Message,
        out: &mut Vec<(AttributeEnv, Process)>,
    ) -> Result<(), EvalError> {
        match proc {
            Process::Nil | Process::Output { .. } => {}
            Process::Input { pred, vars, updates, cont } => {
                if vars.len() != msg.values.len() {
                    return Ok(());
                }
                let step = || -> Result<Option<(AttributeEnv, Process)>, EvalError> {
                    let receiving = close(&substitute_pred(pred, vars, &msg.values)?, env)?;
                    if !satisfies(&msg.env, &receiving) || !satisfies(&restrict_env(env, iface), &msg.pred) {
                        return Ok(None);
                    }
                    let sigma: Subst = vars.iter().cloned().zip(msg.values.iter().cloned()).collect();
                    let updates = subst_updates(updates, &sigma);
                    let next = apply_updates(env, &updates, &self.defs.domains)?;
                    Ok(Some((next, cont.subst(&sigma))))
                };
                if let Some(Some(r)) = self.recover(step())? {
                    out.push(r);
                }
            }
            Process::Aware(guard, p) => {
                if let Some(g) = self.recover(close(guard, env))? {
                    if satisfies(env, &g) {
                        self.inputs_into(env, iface, p, msg, out)?;
                    }
                }
            }
            Process::Choice(p, q) => {
                self.inputs_into(env, iface, p, msg, out)?;
                self.inputs_into(env, iface, q, msg, out)?;
            }
            Process::Par(p, q) => {
                let mut left = Vec::new();
                self.inputs_into(env, iface, p, msg, &mut left)?;
                out.extend(left.into_iter().map(|(g, p2)| (g, Process::par(p2, (**q).clone()))));
                let mut right = Vec::new();
                self.inputs_into(env, iface, q, msg, &mut right)?;
                out.extend(right.into_iter().map(|(g, q2)| (g, Process::par((**p).clone(), q2))));
            }
            Process::Call(k, args) => {
                if let Some(body) = self.recover(self.unfold(k, args, env))? {
                    self.inputs_into(env, iface, &body, msg, out)?;
                }
            }
        }
        Ok(())
    }

    /// Output transitions of a leaf component.
    pub fn component_out_steps(&self, leaf: &Component) -> Result<Vec<(Label, Component)>, EvalError> {
        let Component::Leaf { env, iface, proc } = leaf else {
            return self.system_out_steps(leaf).map(|v| v.into_iter().map(|(m, c)| (Label::Output(m), c)).collect());
        };
        let steps = self.process_outputs(env, iface, proc)?;
        Ok(sorted(steps.into_iter().map(|(m, g, p)| {
            (Label::Output(m), Component::Leaf { env: g, iface: iface.clone(), proc: p })
        })))
    }

    /// Reaction of a leaf component to an incoming message: one `Input`
    /// transition per accepting branch, or a single `Discard` self-loop.
    pub fn component_in_step(&self, leaf: &Component, msg: &Message) -> Result<Vec<(Label, Component)>, EvalError> {
        let Component::Leaf { env, iface, proc } = leaf else {
            return self
                .system_in_step(leaf, msg)
                .map(|v| v.into_iter().map(|c| (Label::Input(msg.clone()), c)).collect());
        };
        let accepted = self.process_inputs(env, iface, proc, msg)?;
        if accepted.is_empty() {
            return Ok(vec![(Label::Discard(msg.clone()), leaf.clone())]);
        }
        Ok(sorted(accepted.into_iter().map(|(g, p)| {
            (Label::Input(msg.clone()), Component::Leaf { env: g, iface: iface.clone(), proc: p })
        })))
    }

    /// Output transitions of a system. Every output of one side of a
    /// parallel composition is paired with each possible reaction of the
    /// other side.
    pub fn system_out_steps(&self, c: &Component) -> Result<Vec<(Message, Component)>, EvalError> {
        let mut out = Vec::new();
        match c {
            Component::Leaf { .. } => {
                for (l, c2) in self.component_out_steps(c)? {
                    if let Label::Output(m) = l {
                        out.push((m, c2));
                    }
                }
            }
            Component::Par(a, b) => {
                for (m, a2) in self.system_out_steps(a)? {
                    for b2 in self.system_in_step(b, &m)? {
                        out.push((m.clone(), Component::par(a2.clone(), b2)));
                    }
                }
                for (m, b2) in self.system_out_steps(b)? {
                    for a2 in self.system_in_step(a, &m)? {
                        out.push((m.clone(), Component::par(a2, b2.clone())));
                    }
                }
            }
            Component::RestrictOut(f, inner) => {
                for (m, c2) in self.system_out_steps(inner)? {
                    let extra = instantiate(f, &m.env, &m.values)?;
                    let pred = ClosedPredicate::and(m.pred.clone(), extra);
                    out.push((m.with_pred(pred), Component::restrict_out(f.clone(), c2)));
                }
            }
            Component::RestrictIn(f, inner) => {
                for (m, c2) in self.system_out_steps(inner)? {
                    out.push((m, Component::restrict_in(f.clone(), c2)));
                }
            }
        }
        Ok(sorted(out))
    }

    /// Successors of a system receiving `msg`. Never empty: a system that
    /// accepts nothing stays where it is.
    pub fn system_in_step(&self, c: &Component, msg: &Message) -> Result<Vec<Component>, EvalError> {
        let out = match c {
            Component::Leaf { .. } => self.component_in_step(c, msg)?.into_iter().map(|(_, c2)| c2).collect(),
            Component::Par(a, b) => {
                let left = self.system_in_step(a, msg)?;
                let right = self.system_in_step(b, msg)?;
                let mut out = Vec::with_capacity(left.len() * right.len());
                for a2 in &left {
                    for b2 in &right {
                        out.push(Component::par(a2.clone(), b2.clone()));
                    }
                }
                out
            }
            Component::RestrictIn(f, inner) => {
                let extra = instantiate(f, &msg.env, &msg.values)?;
                let strengthened = msg.with_pred(ClosedPredicate::and(msg.pred.clone(), extra));
                self.system_in_step(inner, &strengthened)?
                    .into_iter()
                    .map(|c2| Component::restrict_in(f.clone(), c2))
                    .collect()
            }
            Component::RestrictOut(f, inner) => self
                .system_in_step(inner, msg)?
                .into_iter()
                .map(|c2| Component::restrict_out(f.clone(), c2))
                .collect(),
        };
        Ok(sorted(out))
    }

    /// All system transitions: outputs plus one input transition per
    /// message of `universe` and reaction.
    pub fn system_steps(&self, c: &Component, universe: &[Message]) -> Result<Vec<(Label, Component)>, EvalError> {
        let mut out: Vec<(Label, Component)> =
            self.system_out_steps(c)?.into_iter().map(|(m, c2)| (Label::Output(m), c2)).collect();
        for m in universe {
            for c2 in self.system_in_step(c, m)? {
                out.push((Label::Input(m.clone()), c2));
            }
        }
        Ok(sorted(out))
    }
}

/// `f(Γ, ṽ)`: instantiates a restriction template against the sender's
/// exposed environment and the transmitted values.
pub fn instantiate(f: &RestrictionFn, env: &AttributeEnv, values: &[Value]) -> Result<ClosedPredicate, EvalError> {
    close_in_scope(&f.template, &ClosureScope { this: None, msg: Some(values), snd: Some(env) })
}

fn sorted<T: Ord>(items: impl IntoIterator<Item = T>) -> Vec<T> {
    items.into_iter().collect::<BTreeSet<_>>().into_iter().collect()
}
