//! The broadcast π-calculus (bπ) fragment without restriction: terms, their
//! reduction semantics and the translation into AbC.

pub mod correspondence;
pub mod encode;
pub mod semantics;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

/// A name occurrence: a free channel constant or a bound variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BpiName {
    Chan(String),
    Var(String),
}

impl BpiName {
    pub fn text(&self) -> &str {
        match self {
            BpiName::Chan(s) | BpiName::Var(s) => s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bpi {
    Nil,
    Tau(Box<Bpi>),
    Input { chan: BpiName, params: Vec<String>, cont: Box<Bpi> },
    Output { chan: BpiName, args: Vec<BpiName>, cont: Box<Bpi> },
    Sum(Box<Bpi>, Box<Bpi>),
    /// `(rec A<x̃>. G)<ỹ>`
    Rec { name: String, params: Vec<String>, body: Box<Bpi>, args: Vec<BpiName> },
    /// `A<ỹ>` inside the body of `rec A`.
    Call { name: String, args: Vec<BpiName> },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BpiError {
    #[error("free variable `{0}`")]
    FreeVariable(String),
    #[error("recursion body `{name}` uses `{var}`, which is not one of its parameters")]
    OpenRecursion { name: String, var: String },
    #[error("`{name}` expects {expected} arguments, got {found}")]
    CallArity { name: String, expected: usize, found: usize },
    #[error("unknown recursion variable `{0}`")]
    UnknownRecursion(String),
    #[error("recursion through `{0}` is not guarded by a prefix")]
    UnguardedRecursion(String),
    #[error("channel map sends `{0}` and `{1}` to the same name")]
    NonInjectiveChannelMap(String, String),
    #[error("exploration bound exceeded after {0} states")]
    BoundExceeded(usize),
}

impl Bpi {
    pub fn output(chan: &str, args: &[&str], cont: Bpi) -> Bpi {
        Bpi::Output {
            chan: BpiName::Chan(chan.into()),
            args: args.iter().map(|a| BpiName::Chan(a.to_string())).collect(),
            cont: Box::new(cont),
        }
    }

    pub fn sum(p: Bpi, q: Bpi) -> Bpi {
        Bpi::Sum(Box::new(p), Box::new(q))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let name = |n: &BpiName, bound: &Vec<String>, out: &mut BTreeSet<String>| {
            if let BpiName::Var(x) = n {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
        };
        match self {
            Bpi::Nil => {}
            Bpi::Tau(p) => p.collect_free(bound, out),
            Bpi::Input { chan, params, cont } => {
                name(chan, bound, out);
                let depth = bound.len();
                bound.extend(params.iter().cloned());
                cont.collect_free(bound, out);
                bound.truncate(depth);
            }
            Bpi::Output { chan, args, cont } => {
                name(chan, bound, out);
                for a in args {
                    name(a, bound, out);
                }
                cont.collect_free(bound, out);
            }
            Bpi::Sum(p, q) => {
                p.collect_free(bound, out);
                q.collect_free(bound, out);
            }
            Bpi::Rec { params, body, args, .. } => {
                for a in args {
                    name(a, bound, out);
                }
                let depth = bound.len();
                bound.extend(params.iter().cloned());
                body.collect_free(bound, out);
                bound.truncate(depth);
            }
            Bpi::Call { args, .. } => {
                for a in args {
                    name(a, bound, out);
                }
            }
        }
    }

    /// Free channel names.
    pub fn channels(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_names(&mut |n| {
            if let BpiName::Chan(c) = n {
                out.insert(c.clone());
            }
        });
        out
    }

    /// Every variable name occurring anywhere, binders included.
    pub fn var_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_names(&mut |n| {
            if let BpiName::Var(x) = n {
                out.insert(x.clone());
            }
        });
        self.visit_binders(&mut |x| {
            out.insert(x.to_string());
        });
        out
    }

    fn visit_names(&self, f: &mut impl FnMut(&BpiName)) {
        match self {
            Bpi::Nil => {}
            Bpi::Tau(p) => p.visit_names(f),
            Bpi::Input { chan, cont, .. } => {
                f(chan);
                cont.visit_names(f);
            }
            Bpi::Output { chan, args, cont } => {
                f(chan);
                args.iter().for_each(&mut *f);
                cont.visit_names(f);
            }
            Bpi::Sum(p, q) => {
                p.visit_names(f);
                q.visit_names(f);
            }
            Bpi::Rec { body, args, .. } => {
                args.iter().for_each(&mut *f);
                body.visit_names(f);
            }
            Bpi::Call { args, .. } => args.iter().for_each(f),
        }
    }

    fn visit_binders(&self, f: &mut impl FnMut(&str)) {
        match self {
            Bpi::Nil | Bpi::Call { .. } => {}
            Bpi::Tau(p) | Bpi::Output { cont: p, .. } => p.visit_binders(f),
            Bpi::Input { params, cont, .. } => {
                params.iter().for_each(|x| f(x));
                cont.visit_binders(f);
            }
            Bpi::Sum(p, q) => {
                p.visit_binders(f);
                q.visit_binders(f);
            }
            Bpi::Rec { params, body, .. } => {
                params.iter().for_each(|x| f(x));
                body.visit_binders(f);
            }
        }
    }

    /// Replaces free variables by channels. Recursion bodies are closed
    /// under their parameters, so only their arguments are affected.
    pub fn subst(&self, sigma: &BTreeMap<String, String>) -> Bpi {
        let name = |n: &BpiName| match n {
            BpiName::Var(x) => match sigma.get(x) {
                Some(c) => BpiName::Chan(c.clone()),
                None => n.clone(),
            },
            other => other.clone(),
        };
        match self {
            Bpi::Nil => Bpi::Nil,
            Bpi::Tau(p) => Bpi::Tau(Box::new(p.subst(sigma))),
            Bpi::Input { chan, params, cont } => {
                let mut inner = sigma.clone();
                for x in params {
                    inner.remove(x);
                }
                Bpi::Input { chan: name(chan), params: params.clone(), cont: Box::new(cont.subst(&inner)) }
            }
            Bpi::Output { chan, args, cont } => Bpi::Output {
                chan: name(chan),
                args: args.iter().map(name).collect(),
                cont: Box::new(cont.subst(sigma)),
            },
            Bpi::Sum(p, q) => Bpi::sum(p.subst(sigma), q.subst(sigma)),
            Bpi::Rec { name: k, params, body, args } => Bpi::Rec {
                name: k.clone(),
                params: params.clone(),
                body: body.clone(),
                args: args.iter().map(name).collect(),
            },
            Bpi::Call { name: k, args } => Bpi::Call { name: k.clone(), args: args.iter().map(name).collect() },
        }
    }

    /// Renames input binders to `_0`, `_1`, ... by nesting depth.
    pub fn canonical(&self) -> Bpi {
        self.canon(&BTreeMap::new(), 0)
    }

    fn canon(&self, ren: &BTreeMap<String, String>, depth: usize) -> Bpi {
        let name = |n: &BpiName| match n {
            BpiName::Var(x) => BpiName::Var(ren.get(x).cloned().unwrap_or_else(|| x.clone())),
            other => other.clone(),
        };
        match self {
            Bpi::Nil => Bpi::Nil,
            Bpi::Tau(p) => Bpi::Tau(Box::new(p.canon(ren, depth))),
            Bpi::Input { chan, params, cont } => {
                let mut inner = ren.clone();
                let fresh: Vec<String> = (0..params.len()).map(|i| format!("_{}", depth + i)).collect();
                for (x, y) in params.iter().zip(&fresh) {
                    inner.insert(x.clone(), y.clone());
                }
                Bpi::Input { chan: name(chan), params: fresh, cont: Box::new(cont.canon(&inner, depth + params.len())) }
            }
            Bpi::Output { chan, args, cont } => Bpi::Output {
                chan: name(chan),
                args: args.iter().map(name).collect(),
                cont: Box::new(cont.canon(ren, depth)),
            },
            Bpi::Sum(p, q) => Bpi::sum(p.canon(ren, depth), q.canon(ren, depth)),
            Bpi::Rec { name: k, params, body, args } => Bpi::Rec {
                name: k.clone(),
                params: params.clone(),
                body: body.clone(),
                args: args.iter().map(name).collect(),
            },
            Bpi::Call { name: k, args } => Bpi::Call { name: k.clone(), args: args.iter().map(name).collect() },
        }
    }

    /// Calls not under a prefix.
    fn unguarded_calls(&self) -> Vec<&str> {
        match self {
            Bpi::Call { name, .. } => vec![name.as_str()],
            Bpi::Sum(p, q) => {
                let mut v = p.unguarded_calls();
                v.extend(q.unguarded_calls());
                v
            }
            _ => Vec::new(),
        }
    }
}

/// A recursion body lifted to a top-level definition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BpiDef {
    pub params: Vec<String>,
    pub body: Bpi,
}

/// A parallel composition of sequential terms with recursion lifted into a
/// table of uniquely named definitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BpiProgram {
    /// The terms as written, one per parallel component.
    pub source: Vec<Bpi>,
    /// The same terms with every `rec` replaced by a call.
    pub components: Vec<Bpi>,
    pub defs: BTreeMap<String, BpiDef>,
}

impl BpiProgram {
    pub fn new(source: Vec<Bpi>) -> Result<Self, BpiError> {
        let mut defs = BTreeMap::new();
        let mut components = Vec::new();
        for t in &source {
            if let Some(x) = t.free_vars().into_iter().next() {
                return Err(BpiError::FreeVariable(x));
            }
            components.push(lift(t, &BTreeMap::new(), &mut defs)?);
        }
        // guardedness of the lifted definitions
        let mut state: BTreeMap<String, u8> = BTreeMap::new();
        fn visit(defs: &BTreeMap<String, BpiDef>, k: &str, state: &mut BTreeMap<String, u8>) -> Result<(), BpiError> {
            match state.get(k) {
                Some(1) => return Err(BpiError::UnguardedRecursion(k.to_string())),
                Some(_) => return Ok(()),
                None => {}
            }
            state.insert(k.to_string(), 1);
            if let Some(d) = defs.get(k) {
                for c in d.body.unguarded_calls() {
                    visit(defs, c, state)?;
                }
            }
            state.insert(k.to_string(), 2);
            Ok(())
        }
        for k in defs.keys() {
            visit(&defs, k, &mut state)?;
        }
        Ok(BpiProgram { source, components, defs })
    }

    pub fn channels(&self) -> BTreeSet<String> {
        self.source.iter().flat_map(|t| t.channels()).collect()
    }
}

/// Replaces `rec` nodes by calls, naming each definition after its binder
/// with a numeric suffix when the name is taken.
fn lift(t: &Bpi, names: &BTreeMap<String, String>, defs: &mut BTreeMap<String, BpiDef>) -> Result<Bpi, BpiError> {
    Ok(match t {
        Bpi::Nil => Bpi::Nil,
        Bpi::Tau(p) => Bpi::Tau(Box::new(lift(p, names, defs)?)),
        Bpi::Input { chan, params, cont } => {
            Bpi::Input { chan: chan.clone(), params: params.clone(), cont: Box::new(lift(cont, names, defs)?) }
        }
        Bpi::Output { chan, args, cont } => {
            Bpi::Output { chan: chan.clone(), args: args.clone(), cont: Box::new(lift(cont, names, defs)?) }
        }
        Bpi::Sum(p, q) => Bpi::sum(lift(p, names, defs)?, lift(q, names, defs)?),
        Bpi::Call { name, args } => {
            let Some(unique) = names.get(name) else {
                return Err(BpiError::UnknownRecursion(name.clone()));
            };
            let expected = defs.get(unique).map(|d| d.params.len());
            if let Some(expected) = expected {
                if expected != args.len() {
                    return Err(BpiError::CallArity { name: name.clone(), expected, found: args.len() });
                }
            }
            Bpi::Call { name: unique.clone(), args: args.clone() }
        }
        Bpi::Rec { name, params, body, args } => {
            if params.len() != args.len() {
                return Err(BpiError::CallArity { name: name.clone(), expected: params.len(), found: args.len() });
            }
            let mut bound: Vec<String> = params.clone();
            let mut free = BTreeSet::new();
            body.collect_free(&mut bound, &mut free);
            if let Some(var) = free.into_iter().next() {
                return Err(BpiError::OpenRecursion { name: name.clone(), var });
            }
            let mut unique = name.clone();
            let mut i = 1;
            while defs.contains_key(&unique) {
                unique = format!("{name}_{i}");
                i += 1;
            }
            // reserve the name (with the right arity) before lifting the body
            defs.insert(unique.clone(), BpiDef { params: params.clone(), body: Bpi::Nil });
            let mut inner = names.clone();
            inner.insert(name.clone(), unique.clone());
            let lifted = lift(body, &inner, defs)?;
            defs.insert(unique.clone(), BpiDef { params: params.clone(), body: lifted });
            Bpi::Call { name: unique, args: args.clone() }
        }
    })
}
