//! State-by-state comparison of a bπ program with its AbC encoding.

use std::collections::BTreeSet;

use super::encode::Encoder;
use super::semantics::{bpi_universe, canonical_state, explore_bpi, BpiLabel};
use super::{BpiError, BpiProgram};
use crate::equivalence::{verdict, Mode, Verdict};
use crate::error::ExploreError;
use crate::lts::{explore, ExploreOptions};
use crate::predicates::ClosedPredicate;
use crate::semantics::{Message, Semantics};
use crate::terms::{AttributeEnv, Component, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub states_checked: usize,
    pub universe_size: usize,
    pub bpi_states: usize,
    pub bpi_transitions: usize,
    pub abc_states: usize,
    pub abc_transitions: usize,
    pub violations: Vec<String>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorrespondenceError {
    #[error(transparent)]
    Bpi(#[from] BpiError),
    #[error(transparent)]
    Explore(#[from] ExploreError),
}

impl From<crate::error::EvalError> for CorrespondenceError {
    fn from(e: crate::error::EvalError) -> Self {
        CorrespondenceError::Explore(e.into())
    }
}

fn tau_message() -> Message {
    Message::new(AttributeEnv::new(), ClosedPredicate::False, Vec::new())
}

/// Checks, at every reachable state of `prog`, that outputs, silent moves,
/// reactions to every message of the closed universe and barbs of the
/// encoding match those of the source term, and that both transition
/// systems have the same size.
pub fn check_correspondence(
    prog: &BpiProgram,
    encoder: &Encoder,
    options: &ExploreOptions,
) -> Result<Report, CorrespondenceError> {
    let max = options.bounds.max_states;
    let universe = bpi_universe(&[prog], max)?;
    let lts = explore_bpi(prog, &universe, max)?;
    let encoded = encoder.program(prog);
    let sem = Semantics { defs: &encoded.defs, strict: options.strict };
    let mut violations = Vec::new();

    for (i, s) in lts.states.iter().enumerate() {
        let enc = encoder.state(s);

        let expected: BTreeSet<(Message, Component)> = prog
            .out_steps(s)?
            .into_iter()
            .map(|(l, t)| {
                let m = match l {
                    BpiLabel::Tau => tau_message(),
                    BpiLabel::Out(m) => encoder.message(&m),
                    BpiLabel::In(_) => unreachable!(),
                };
                (m, encoder.state(&canonical_state(&t)).canonical())
            })
            .collect();
        let actual: Vec<(Message, Component)> = sem
            .system_out_steps(&enc)?
            .into_iter()
            .map(|(m, c)| (m, c.canonical()))
            .collect();
        let actual_set: BTreeSet<(Message, Component)> = actual.iter().cloned().collect();
        if actual_set != expected || actual.len() != expected.len() {
            violations.push(format!(
                "state {i}: {} output/silent moves in the source, {} in the encoding",
                expected.len(),
                actual.len()
            ));
        }

        for m in &universe {
            let mut expected: Vec<Component> =
                prog.in_steps(s, m)?.iter().map(|t| encoder.state(&canonical_state(t)).canonical()).collect();
            expected.sort();
            expected.dedup();
            let mut actual: Vec<Component> =
                sem.system_in_step(&enc, &encoder.message(m))?.into_iter().map(|c| c.canonical()).collect();
            actual.sort();
            actual.dedup();
            if actual != expected {
                violations.push(format!(
                    "state {i}: reaction to {}<{}> differs ({} vs {} derivatives)",
                    m.chan,
                    m.values.join(", "),
                    expected.len(),
                    actual.len()
                ));
            }
        }

        let barbs: BTreeSet<Value> = prog.barbs(s)?.iter().map(|c| Value::Name(encoder.channel(c))).collect();
        let enc_barbs: BTreeSet<Value> = actual
            .iter()
            .filter(|(m, _)| m.pred != ClosedPredicate::False)
            .filter_map(|(m, _)| m.values.first().cloned())
            .collect();
        if barbs != enc_barbs {
            violations.push(format!("state {i}: barbs differ"));
        }
    }

    let abc_universe: Vec<Message> = universe.iter().map(|m| encoder.message(m)).collect();
    let abc = explore(&encoded.system, &abc_universe, &encoded.defs, options)?;
    if abc.num_states() != lts.states.len() || abc.transitions.len() != lts.transitions.len() {
        violations.push(format!(
            "transition systems differ in size: {} states / {} transitions against {} / {}",
            lts.states.len(),
            lts.transitions.len(),
            abc.num_states(),
            abc.transitions.len()
        ));
    }

    Ok(Report {
        states_checked: lts.states.len(),
        universe_size: universe.len(),
        bpi_states: lts.states.len(),
        bpi_transitions: lts.transitions.len(),
        abc_states: abc.num_states(),
        abc_transitions: abc.transitions.len(),
        violations,
    })
}

/// Bisimilarity of the encodings of two programs, explored over the
/// encoded closure of their joint outputs.
pub fn encoded_verdict(
    p: &BpiProgram,
    q: &BpiProgram,
    mode: Mode,
    options: &ExploreOptions,
) -> Result<Verdict, CorrespondenceError> {
    let universe = bpi_universe(&[p, q], options.bounds.max_states)?;
    let enc = Encoder::identity();
    let msgs: Vec<Message> = universe.iter().map(|m| enc.message(m)).collect();
    let (ep, eq) = (enc.program(p), enc.program(q));
    let l = explore(&ep.system, &msgs, &ep.defs, options)?;
    let r = explore(&eq.system, &msgs, &eq.defs, options)?;
    Ok(verdict(&l, &r, msgs, mode))
}
