//! Closed predicates, satisfaction, closure under an environment and a
//! decision procedure for satisfiability, implication and equivalence.
//!
//! The solver enumerates a finite set of candidate valuations that is
//! complete for the atom catalogue: equality and disequality over values,
//! integer order against constants and between attributes, and membership.
//! Every attribute may additionally be undefined unless a domain has been
//! declared for it.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{EvalError, ModelError};
use crate::terms::{AttributeEnv, Expr, Predicate, Rel, Value};

/// Declared attribute domains. An attribute with a declared domain is
/// always defined and takes one of the listed values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DomainContext(BTreeMap<String, BTreeSet<Value>>);

impl DomainContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare<I: IntoIterator<Item = Value>>(&mut self, attr: &str, values: I) -> Result<(), ModelError> {
        let values: BTreeSet<Value> = values.into_iter().collect();
        if values.is_empty() {
            return Err(ModelError::EmptyDomain(attr.to_string()));
        }
        match self.0.get(attr) {
            Some(existing) if *existing != values => Err(ModelError::ConflictingDomain(attr.to_string())),
            _ => {
                self.0.insert(attr.to_string(), values);
                Ok(())
            }
        }
    }

    pub fn with(mut self, attr: &str, values: &[&str]) -> Self {
        self.declare(attr, values.iter().map(|v| Value::name(*v))).expect("non-empty domain");
        self
    }

    pub fn domain(&self, attr: &str) -> Option<&BTreeSet<Value>> {
        self.0.get(attr)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &BTreeSet<Value>)> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn merge(&mut self, other: &DomainContext) -> Result<(), ModelError> {
        for (a, vs) in &other.0 {
            self.declare(a, vs.iter().cloned())?;
        }
        Ok(())
    }
}

/// Operand of a closed atom.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    /// An attribute of the environment the predicate is checked against.
    Attr(String),
    Const(Value),
}

impl Term {
    fn lookup<'a>(&'a self, env: &'a AttributeEnv) -> Option<&'a Value> {
        match self {
            Term::Attr(a) => env.get(a),
            Term::Const(v) => Some(v),
        }
    }
}

/// A predicate without `this.a`, variables or operator applications: every
/// atom compares attributes and constants.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClosedPredicate {
    True,
    False,
    Atom(Rel, Term, Term),
    Not(Box<ClosedPredicate>),
    And(Box<ClosedPredicate>, Box<ClosedPredicate>),
    Or(Box<ClosedPredicate>, Box<ClosedPredicate>),
}

impl ClosedPredicate {
    pub fn atom(rel: Rel, lhs: Term, rhs: Term) -> Self {
        ClosedPredicate::Atom(rel, lhs, rhs)
    }

    /// `attr == value`
    pub fn attr_eq(attr: &str, value: impl Into<Value>) -> Self {
        ClosedPredicate::Atom(Rel::Eq, Term::Attr(attr.to_string()), Term::Const(value.into()))
    }

    /// `attr != value`
    pub fn attr_ne(attr: &str, value: impl Into<Value>) -> Self {
        ClosedPredicate::Atom(Rel::Ne, Term::Attr(attr.to_string()), Term::Const(value.into()))
    }

    pub fn negate(p: ClosedPredicate) -> Self {
        ClosedPredicate::Not(Box::new(p))
    }

    pub fn and(p: ClosedPredicate, q: ClosedPredicate) -> Self {
        ClosedPredicate::And(Box::new(p), Box::new(q))
    }

    pub fn or(p: ClosedPredicate, q: ClosedPredicate) -> Self {
        ClosedPredicate::Or(Box::new(p), Box::new(q))
    }

    pub fn attributes(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |_, l, r| {
            for t in [l, r] {
                if let Term::Attr(a) = t {
                    out.insert(a.clone());
                }
            }
        });
        out
    }

    fn visit_atoms(&self, f: &mut impl FnMut(Rel, &Term, &Term)) {
        match self {
            ClosedPredicate::True | ClosedPredicate::False => {}
            ClosedPredicate::Atom(r, l, rr) => f(*r, l, rr),
            ClosedPredicate::Not(p) => p.visit_atoms(f),
            ClosedPredicate::And(p, q) | ClosedPredicate::Or(p, q) => {
                p.visit_atoms(f);
                q.visit_atoms(f);
            }
        }
    }

    /// Embeds the closed predicate back into the general syntax.
    pub fn to_predicate(&self) -> Predicate {
        let term = |t: &Term| match t {
            Term::Attr(a) => Expr::Attr(a.clone()),
            Term::Const(v) => Expr::Const(v.clone()),
        };
        match self {
            ClosedPredicate::True => Predicate::True,
            ClosedPredicate::False => Predicate::False,
            ClosedPredicate::Atom(r, l, rr) => Predicate::Atom(*r, term(l), term(rr)),
            ClosedPredicate::Not(p) => Predicate::negate(p.to_predicate()),
            ClosedPredicate::And(p, q) => Predicate::and(p.to_predicate(), q.to_predicate()),
            ClosedPredicate::Or(p, q) => Predicate::or(p.to_predicate(), q.to_predicate()),
        }
    }
}

/// `Γ ⊨ Π`
pub fn satisfies(env: &AttributeEnv, pred: &ClosedPredicate) -> bool {
    match pred {
        ClosedPredicate::True => true,
        ClosedPredicate::False => false,
        ClosedPredicate::Atom(r, l, rr) => r.holds(l.lookup(env), rr.lookup(env)),
        ClosedPredicate::Not(p) => !satisfies(env, p),
        ClosedPredicate::And(p, q) => satisfies(env, p) && satisfies(env, q),
        ClosedPredicate::Or(p, q) => satisfies(env, p) || satisfies(env, q),
    }
}

/// Where the non-attribute references of a predicate get their values.
#[derive(Clone, Copy, Default)]
pub(crate) struct ClosureScope<'a> {
    /// Environment for `this.a`.
    pub this: Option<&'a AttributeEnv>,
    /// Transmitted values for `msg[i]`.
    pub msg: Option<&'a [Value]>,
    /// Sender's exposed environment for `snd.a`.
    pub snd: Option<&'a AttributeEnv>,
}

enum Operand {
    Attr(String),
    Val(Value),
    Undefined,
}

fn close_operand(e: &Expr, scope: &ClosureScope<'_>) -> Result<Operand, EvalError> {
    Ok(match e {
        Expr::Const(v) => Operand::Val(v.clone()),
        Expr::Attr(a) => Operand::Attr(a.clone()),
        Expr::Var(x) => return Err(EvalError::UnboundVariable(x.clone())),
        Expr::This(a) => match scope.this.and_then(|g| g.get(a)) {
            Some(v) => Operand::Val(v.clone()),
            None => return Err(EvalError::UndefinedAttribute(a.clone())),
        },
        Expr::Msg(i) => match scope.msg {
            Some(vals) => vals.get(*i).cloned().map_or(Operand::Undefined, Operand::Val),
            None => return Err(EvalError::TemplateOutsideRestriction),
        },
        Expr::Snd(a) => match scope.snd {
            Some(g) => g.get(a).cloned().map_or(Operand::Undefined, Operand::Val),
            None => return Err(EvalError::TemplateOutsideRestriction),
        },
        Expr::Op(op, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                match close_operand(a, scope)? {
                    Operand::Val(v) => vals.push(v),
                    Operand::Undefined => return Ok(Operand::Undefined),
                    Operand::Attr(a) => return Err(EvalError::AttributeUnderOperator(a)),
                }
            }
            match op.apply(&vals) {
                Ok(v) => Operand::Val(v),
                Err(EvalError::OperatorDomain(_)) => Operand::Undefined,
                Err(e) => return Err(e),
            }
        }
    })
}

pub(crate) fn close_in_scope(pred: &Predicate, scope: &ClosureScope<'_>) -> Result<ClosedPredicate, EvalError> {
    Ok(match pred {
        Predicate::True => ClosedPredicate::True,
        Predicate::False => ClosedPredicate::False,
        Predicate::Atom(rel, l, r) => {
            let l = close_operand(l, scope)?;
            let r = close_operand(r, scope)?;
            match (l, r) {
                (Operand::Attr(a), Operand::Attr(b)) => ClosedPredicate::Atom(*rel, Term::Attr(a), Term::Attr(b)),
                (Operand::Attr(a), Operand::Val(v)) => ClosedPredicate::Atom(*rel, Term::Attr(a), Term::Const(v)),
                (Operand::Val(v), Operand::Attr(a)) => ClosedPredicate::Atom(*rel, Term::Const(v), Term::Attr(a)),
                (Operand::Val(a), Operand::Val(b)) => constant(rel.holds(Some(&a), Some(&b))),
                // an undefined operand decides the atom whatever the other side is
                _ => constant(rel.holds(None, None)),
            }
        }
        Predicate::Not(p) => ClosedPredicate::negate(close_in_scope(p, scope)?),
        Predicate::And(p, q) => ClosedPredicate::and(close_in_scope(p, scope)?, close_in_scope(q, scope)?),
        Predicate::Or(p, q) => ClosedPredicate::or(close_in_scope(p, scope)?, close_in_scope(q, scope)?),
    })
}

fn constant(b: bool) -> ClosedPredicate {
    if b {
        ClosedPredicate::True
    } else {
        ClosedPredicate::False
    }
}

/// `{Π}_Γ`: replaces every `this.a` by `Γ(a)` and evaluates operator
/// applications over constants. Bare attributes stay symbolic. An operator
/// outside its domain makes the enclosing atom behave as over an undefined
/// operand.
pub fn close(pred: &Predicate, env: &AttributeEnv) -> Result<ClosedPredicate, EvalError> {
    close_in_scope(pred, &ClosureScope { this: Some(env), ..Default::default() })
}

/// `Π[ṽ/x̃]`
pub fn substitute_pred(pred: &Predicate, vars: &[String], values: &[Value]) -> Result<Predicate, EvalError> {
    if vars.len() != values.len() {
        return Err(EvalError::ArityMismatch { expected: vars.len(), found: values.len() });
    }
    let sigma = vars.iter().cloned().zip(values.iter().cloned()).collect();
    Ok(pred.subst(&sigma))
}

// ---------------------------------------------------------------------------
// solver

#[derive(Clone, Copy)]
enum Slot {
    Attr(usize),
    Const(usize),
}

enum Compiled {
    Const(bool),
    Atom(Rel, Slot, Slot),
    Not(Box<Compiled>),
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
}

struct Problem {
    attrs: Vec<String>,
    consts: Vec<Value>,
    formulas: Vec<Compiled>,
}

impl Problem {
    fn new(preds: &[&ClosedPredicate]) -> Self {
        let mut attrs = BTreeSet::new();
        let mut consts = BTreeSet::new();
        for p in preds {
            p.visit_atoms(&mut |_, l, r| {
                for t in [l, r] {
                    match t {
                        Term::Attr(a) => {
                            attrs.insert(a.clone());
                        }
                        Term::Const(v) => {
                            consts.insert(v.clone());
                        }
                    }
                }
            });
        }
        let attrs: Vec<String> = attrs.into_iter().collect();
        let consts: Vec<Value> = consts.into_iter().collect();
        let formulas = preds.iter().map(|p| compile(p, &attrs, &consts)).collect();
        Problem { attrs, consts, formulas }
    }

    fn eval(f: &Compiled, assignment: &[Option<&Value>], consts: &[Value]) -> bool {
        let get = |s: Slot| match s {
            Slot::Attr(i) => assignment[i],
            Slot::Const(i) => Some(&consts[i]),
        };
        match f {
            Compiled::Const(b) => *b,
            Compiled::Atom(r, l, rr) => r.holds(get(*l), get(*rr)),
            Compiled::Not(p) => !Self::eval(p, assignment, consts),
            Compiled::And(p, q) => Self::eval(p, assignment, consts) && Self::eval(q, assignment, consts),
            Compiled::Or(p, q) => Self::eval(p, assignment, consts) || Self::eval(q, assignment, consts),
        }
    }
}

fn compile(p: &ClosedPredicate, attrs: &[String], consts: &[Value]) -> Compiled {
    let slot = |t: &Term| match t {
        Term::Attr(a) => Slot::Attr(attrs.binary_search(a).expect("collected")),
        Term::Const(v) => Slot::Const(consts.binary_search(v).expect("collected")),
    };
    match p {
        ClosedPredicate::True => Compiled::Const(true),
        ClosedPredicate::False => Compiled::Const(false),
        ClosedPredicate::Atom(r, l, rr) => Compiled::Atom(*r, slot(l), slot(rr)),
        ClosedPredicate::Not(q) => Compiled::Not(Box::new(compile(q, attrs, consts))),
        ClosedPredicate::And(a, b) => Compiled::And(Box::new(compile(a, attrs, consts)), Box::new(compile(b, attrs, consts))),
        ClosedPredicate::Or(a, b) => Compiled::Or(Box::new(compile(a, attrs, consts)), Box::new(compile(b, attrs, consts))),
    }
}

const MAX_MEMBERSHIP_PROBES: usize = 8;

/// Candidate values (None = undefined) for each attribute of the problem.
fn candidates(preds: &[&ClosedPredicate], attrs: &[String], domains: &DomainContext) -> Vec<Vec<Option<Value>>> {
    let index = |a: &str| attrs.binary_search_by(|x| x.as_str().cmp(a)).expect("collected");
    let mut parent: Vec<usize> = (0..attrs.len()).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    let mut has_order = false;
    let mut values: BTreeSet<Value> = BTreeSet::new();
    let mut set_attrs = BTreeSet::new();
    let mut member_consts: BTreeSet<Value> = BTreeSet::new();
    let mut member_attrs = BTreeSet::new();
    for p in preds {
        p.visit_atoms(&mut |rel, l, r| {
            if matches!(rel, Rel::Lt | Rel::Le | Rel::Gt | Rel::Ge) {
                has_order = true;
            }
            if let (Term::Attr(a), Term::Attr(b)) = (l, r) {
                let (ra, rb) = (find(&mut parent, index(a)), find(&mut parent, index(b)));
                parent[ra] = rb;
            }
            for t in [l, r] {
                if let Term::Const(v) = t {
                    values.insert(v.clone());
                    if let Value::Set(s) = v {
                        values.extend(s.iter().cloned());
                    }
                }
            }
            if rel == Rel::In {
                if let Term::Attr(b) = r {
                    set_attrs.insert(index(b));
                }
                match l {
                    Term::Const(v) => {
                        member_consts.insert(v.clone());
                    }
                    Term::Attr(a) => {
                        member_attrs.insert(index(a));
                    }
                }
            }
        });
    }
    let mut group_size = vec![0usize; attrs.len()];
    for i in 0..attrs.len() {
        let r = find(&mut parent, i);
        group_size[r] += 1;
    }
    let ints: BTreeSet<i64> = values.iter().filter_map(Value::as_int).collect();

    let base = |i: usize, parent: &mut [usize]| -> BTreeSet<Value> {
        let k = group_size[find(parent, i)].max(1);
        let mut out = values.clone();
        for j in 0..k {
            out.insert(Value::Name(format!("#fresh{j}")));
        }
        if has_order {
            out.extend(integer_representatives(&ints, k as i64).into_iter().map(Value::Int));
        }
        out
    };

    let mut result = Vec::with_capacity(attrs.len());
    let mut bases = Vec::with_capacity(attrs.len());
    for i in 0..attrs.len() {
        bases.push(base(i, &mut parent));
    }
    let mut probes: BTreeSet<Value> = member_consts;
    for i in &member_attrs {
        probes.extend(bases[*i].iter().cloned());
    }
    let probes: Vec<Value> = probes.into_iter().take(MAX_MEMBERSHIP_PROBES).collect();
    for (i, attr) in attrs.iter().enumerate() {
        if let Some(dom) = domains.domain(attr) {
            result.push(dom.iter().cloned().map(Some).collect());
            continue;
        }
        let mut cands = bases[i].clone();
        if set_attrs.contains(&i) {
            for mask in 0u32..(1 << probes.len()) {
                let s = probes.iter().enumerate().filter(|(b, _)| mask & (1 << b) != 0).map(|(_, v)| v.clone());
                cands.insert(Value::set(s));
            }
        }
        let mut v: Vec<Option<Value>> = vec![None];
        v.extend(cands.into_iter().map(Some));
        result.push(v);
    }
    result
}

/// `k` integers below the minimum, above the maximum and inside every gap
/// between consecutive constants (as many as fit).
fn integer_representatives(ints: &BTreeSet<i64>, k: i64) -> BTreeSet<i64> {
    let mut out = BTreeSet::new();
    let (Some(&lo), Some(&hi)) = (ints.first(), ints.last()) else {
        out.extend(0..k);
        return out;
    };
    for j in 1..=k {
        out.insert(lo.saturating_sub(j));
        out.insert(hi.saturating_add(j));
    }
    let sorted: Vec<i64> = ints.iter().copied().collect();
    for w in sorted.windows(2) {
        let mut x = w[0].saturating_add(1);
        let mut n = 0;
        while x < w[1] && n < k {
            out.insert(x);
            x += 1;
            n += 1;
        }
    }
    out
}

/// Searches the candidate valuations for one on which `accept` holds.
/// `accept` receives the truth value of every predicate of `preds`.
fn search(
    preds: &[&ClosedPredicate],
    domains: &DomainContext,
    mut accept: impl FnMut(&[bool]) -> bool,
) -> Option<AttributeEnv> {
    let problem = Problem::new(preds);
    let cands = candidates(preds, &problem.attrs, domains);
    let n = problem.attrs.len();
    let mut idx = vec![0usize; n];
    let mut truth = vec![false; preds.len()];
    let mut assignment: Vec<Option<&Value>> = vec![None; n];
    loop {
        for i in 0..n {
            assignment[i] = cands[i][idx[i]].as_ref();
        }
        for (t, f) in truth.iter_mut().zip(&problem.formulas) {
            *t = Problem::eval(f, &assignment, &problem.consts);
        }
        if accept(&truth) {
            return Some(
                problem
                    .attrs
                    .iter()
                    .zip(&assignment)
                    .filter_map(|(a, v)| v.map(|v| (a.clone(), v.clone())))
                    .collect(),
            );
        }
        // odometer
        let mut i = 0;
        loop {
            if i == n {
                return None;
            }
            idx[i] += 1;
            if idx[i] < cands[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// A satisfying environment respecting the declared domains, if any.
pub fn find_model(pred: &ClosedPredicate, domains: &DomainContext) -> Option<AttributeEnv> {
    search(&[pred], domains, |t| t[0])
}

pub fn is_sat(pred: &ClosedPredicate, domains: &DomainContext) -> bool {
    find_model(pred, domains).is_some()
}

pub fn is_valid(pred: &ClosedPredicate, domains: &DomainContext) -> bool {
    search(&[pred], domains, |t| !t[0]).is_none()
}

/// `Π ≃ ff`
pub fn is_ff(pred: &ClosedPredicate, domains: &DomainContext) -> bool {
    !is_sat(pred, domains)
}

/// `Π1 ⇒ Π2`: every model of the first is a model of the second.
pub fn implies(p1: &ClosedPredicate, p2: &ClosedPredicate, domains: &DomainContext) -> bool {
    search(&[p1, p2], domains, |t| t[0] && !t[1]).is_none()
}

/// `Π1 ≃ Π2`
pub fn equiv(p1: &ClosedPredicate, p2: &ClosedPredicate, domains: &DomainContext) -> bool {
    p1 == p2 || search(&[p1, p2], domains, |t| t[0] != t[1]).is_none()
}

/// Canonical rendering form: `ff` for unsatisfiable predicates, `tt` for
/// valid ones, otherwise a flattened, sorted and deduplicated structure
/// with negated (dis)equalities folded and atoms oriented attribute-first.
pub fn normalize(pred: &ClosedPredicate, domains: &DomainContext) -> ClosedPredicate {
    if !is_sat(pred, domains) {
        return ClosedPredicate::False;
    }
    if is_valid(pred, domains) {
        return ClosedPredicate::True;
    }
    simplify(pred)
}

fn simplify(pred: &ClosedPredicate) -> ClosedPredicate {
    match pred {
        ClosedPredicate::True | ClosedPredicate::False => pred.clone(),
        ClosedPredicate::Atom(r, l, rr) => orient(*r, l.clone(), rr.clone()),
        ClosedPredicate::Not(p) => match simplify(p) {
            ClosedPredicate::True => ClosedPredicate::False,
            ClosedPredicate::False => ClosedPredicate::True,
            ClosedPredicate::Not(q) => *q,
            ClosedPredicate::Atom(Rel::Eq, l, r) => ClosedPredicate::Atom(Rel::Ne, l, r),
            ClosedPredicate::Atom(Rel::Ne, l, r) => ClosedPredicate::Atom(Rel::Eq, l, r),
            q => ClosedPredicate::negate(q),
        },
        ClosedPredicate::And(..) | ClosedPredicate::Or(..) => {
            let is_and = matches!(pred, ClosedPredicate::And(..));
            let mut parts = BTreeSet::new();
            collect_junct(pred, is_and, &mut parts);
            let (unit, zero) = if is_and {
                (ClosedPredicate::True, ClosedPredicate::False)
            } else {
                (ClosedPredicate::False, ClosedPredicate::True)
            };
            if parts.contains(&zero) {
                return zero;
            }
            parts.remove(&unit);
            let mut it = parts.into_iter();
            let Some(first) = it.next() else { return unit };
            it.fold(first, |acc, p| {
                if is_and {
                    ClosedPredicate::and(acc, p)
                } else {
                    ClosedPredicate::or(acc, p)
                }
            })
        }
    }
}

fn collect_junct(pred: &ClosedPredicate, is_and: bool, out: &mut BTreeSet<ClosedPredicate>) {
    match (pred, is_and) {
        (ClosedPredicate::And(p, q), true) | (ClosedPredicate::Or(p, q), false) => {
            collect_junct(p, is_and, out);
            collect_junct(q, is_and, out);
        }
        _ => {
            let s = simplify(pred);
            match (&s, is_and) {
                (ClosedPredicate::And(..), true) | (ClosedPredicate::Or(..), false) => collect_junct(&s, is_and, out),
                _ => {
                    out.insert(s);
                }
            }
        }
    }
}

fn orient(rel: Rel, l: Term, r: Term) -> ClosedPredicate {
    let flip = |rel: Rel| match rel {
        Rel::Lt => Rel::Gt,
        Rel::Le => Rel::Ge,
        Rel::Gt => Rel::Lt,
        Rel::Ge => Rel::Le,
        other => other,
    };
    let swap = match (&l, &r) {
        _ if rel == Rel::In => false,
        (Term::Const(_), Term::Attr(_)) => true,
        (Term::Attr(a), Term::Attr(b)) => matches!(rel, Rel::Eq | Rel::Ne) && a > b,
        _ => false,
    };
    if swap {
        ClosedPredicate::Atom(flip(rel), r, l)
    } else {
        ClosedPredicate::Atom(rel, l, r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::Op;

    fn role_domain() -> DomainContext {
        DomainContext::new().with("role", &["client", "fwd"])
    }

    fn a(attr: &str) -> Term {
        Term::Attr(attr.to_string())
    }

    fn c(v: impl Into<Value>) -> Term {
        Term::Const(v.into())
    }

    #[test]
    fn constants_and_atoms() {
        let g = AttributeEnv::new().with("role", "fwd");
        assert!(satisfies(&g, &ClosedPredicate::True));
        assert!(!satisfies(&g, &ClosedPredicate::False));
        assert!(!satisfies(&AttributeEnv::new(), &ClosedPredicate::False));
        assert!(satisfies(&g, &ClosedPredicate::attr_eq("role", "fwd")));
        assert!(!satisfies(&g, &ClosedPredicate::attr_eq("role", "client")));
    }

    #[test]
    fn undefined_operand_convention() {
        let empty = AttributeEnv::new();
        let p = ClosedPredicate::negate(ClosedPredicate::attr_eq("a", 5));
        assert!(satisfies(&empty, &p));
        assert!(satisfies(&empty, &ClosedPredicate::attr_ne("a", 5)));
        assert!(!satisfies(&empty, &ClosedPredicate::atom(Rel::Lt, a("a"), c(5))));
        assert!(!satisfies(&empty, &ClosedPredicate::atom(Rel::In, a("a"), c(Value::set([1.into()])))));
    }

    #[test]
    fn closure_replaces_this() {
        let p = Predicate::eq(Expr::attr("a"), Expr::this("a"));
        let g = AttributeEnv::new().with("a", "v");
        assert_eq!(close(&p, &g).unwrap(), ClosedPredicate::attr_eq("a", "v"));
        let q = Predicate::eq(Expr::attr("a"), Expr::constant("v"));
        assert_eq!(close(&q, &g).unwrap(), ClosedPredicate::attr_eq("a", "v"));
        assert_eq!(close(&Predicate::True, &g).unwrap(), ClosedPredicate::True);
        assert!(matches!(close(&Predicate::eq(Expr::attr("a"), Expr::this("b")), &g), Err(EvalError::UndefinedAttribute(_))));
    }

    #[test]
    fn closure_folds_constant_atoms() {
        let g = AttributeEnv::new().with("nbr", Value::set(["p".into(), "f2".into()]));
        let p = Predicate::atom(Rel::In, Expr::constant("p"), Expr::this("nbr"));
        assert_eq!(close(&p, &g).unwrap(), ClosedPredicate::True);
        let q = Predicate::atom(Rel::In, Expr::constant("f9"), Expr::this("nbr"));
        assert_eq!(close(&q, &g).unwrap(), ClosedPredicate::False);
        // operator failure behaves like an undefined operand
        let bad = Expr::op(Op::Get, vec![Expr::constant(Value::Tuple(vec![])), Expr::constant(0)]);
        let r = Predicate::atom(Rel::Ne, Expr::attr("a"), bad.clone());
        assert_eq!(close(&r, &g).unwrap(), ClosedPredicate::True);
        let s = Predicate::eq(Expr::attr("a"), bad);
        assert_eq!(close(&s, &g).unwrap(), ClosedPredicate::False);
    }

    #[test]
    fn substitution_in_predicates() {
        let p = Predicate::eq(Expr::var("x"), Expr::constant("try"));
        let q = substitute_pred(&p, &["x".into()], &["try".into()]).unwrap();
        assert_eq!(q, Predicate::eq(Expr::constant("try"), Expr::constant("try")));
        assert_eq!(substitute_pred(&Predicate::True, &["x".into()], &[1.into()]).unwrap(), Predicate::True);
        let lt = Predicate::atom(Rel::Lt, Expr::var("x"), Expr::var("y"));
        let r = substitute_pred(&lt, &["x".into(), "y".into()], &[1.into(), 2.into()]).unwrap();
        assert_eq!(r, Predicate::atom(Rel::Lt, Expr::constant(1), Expr::constant(2)));
        assert!(substitute_pred(&lt, &["x".into()], &[]).is_err());
    }

    #[test]
    fn satisfiability() {
        let d = DomainContext::new();
        assert!(!is_sat(&ClosedPredicate::False, &d));
        let p = ClosedPredicate::and(ClosedPredicate::attr_eq("role", "client"), ClosedPredicate::attr_ne("role", "fwd"));
        let m = find_model(&p, &d).unwrap();
        assert!(satisfies(&m, &p));
        assert_eq!(m.get("role"), Some(&Value::name("client")));
        let q = ClosedPredicate::and(
            ClosedPredicate::atom(Rel::Lt, a("a"), c(3)),
            ClosedPredicate::atom(Rel::Gt, a("a"), c(5)),
        );
        assert!(!is_sat(&q, &d));
        let between = ClosedPredicate::and(
            ClosedPredicate::atom(Rel::Gt, a("a"), c(3)),
            ClosedPredicate::atom(Rel::Lt, a("a"), c(5)),
        );
        assert_eq!(find_model(&between, &d).unwrap().get("a"), Some(&Value::Int(4)));
    }

    #[test]
    fn attribute_chains_need_distinct_points() {
        // 1 < a < b < c < 5 needs three distinct integers in one gap
        let d = DomainContext::new();
        let p = [
            ClosedPredicate::atom(Rel::Lt, c(1), a("a")),
            ClosedPredicate::atom(Rel::Lt, a("a"), a("b")),
            ClosedPredicate::atom(Rel::Lt, a("b"), a("c")),
            ClosedPredicate::atom(Rel::Lt, a("c"), c(5)),
        ]
        .into_iter()
        .reduce(ClosedPredicate::and)
        .unwrap();
        assert!(is_sat(&p, &d));
        let tight = ClosedPredicate::and(p, ClosedPredicate::atom(Rel::Lt, a("c"), c(4)));
        assert!(!is_sat(&tight, &d));
    }

    #[test]
    fn membership_between_attributes() {
        let d = DomainContext::new();
        let p = ClosedPredicate::and(
            ClosedPredicate::atom(Rel::In, a("x"), a("s")),
            ClosedPredicate::negate(ClosedPredicate::atom(Rel::In, c(1), a("s"))),
        );
        assert!(is_sat(&p, &d));
        let q = ClosedPredicate::and(
            ClosedPredicate::atom(Rel::In, c(1), a("s")),
            ClosedPredicate::attr_eq("s", Value::set([2.into()])),
        );
        assert!(!is_sat(&q, &d));
    }

    #[test]
    fn implication_and_equivalence() {
        let d = DomainContext::new();
        let pi1 = ClosedPredicate::attr_eq("role", "client");
        assert!(implies(&ClosedPredicate::False, &pi1, &d));
        let wider = ClosedPredicate::or(pi1.clone(), ClosedPredicate::attr_eq("role", "fwd"));
        assert!(implies(&pi1, &wider, &d));
        assert!(!implies(&wider, &pi1, &d));
        assert!(implies(&ClosedPredicate::attr_eq("a", 1), &ClosedPredicate::atom(Rel::Le, a("a"), c(1)), &d));

        let ne = ClosedPredicate::attr_ne("a", 10);
        let not_eq = ClosedPredicate::negate(ClosedPredicate::attr_eq("a", 10));
        assert!(equiv(&ne, &not_eq, &d));
        assert!(equiv(&pi1, &pi1, &d));

        let both = ClosedPredicate::and(pi1.clone(), ClosedPredicate::attr_ne("role", "fwd"));
        assert!(equiv(&both, &pi1, &role_domain()));
        // only the domain makes these two coincide
        assert!(!equiv(&ClosedPredicate::attr_ne("role", "fwd"), &pi1, &d));
        assert!(equiv(&ClosedPredicate::attr_ne("role", "fwd"), &pi1, &role_domain()));
    }

    #[test]
    fn forwarding_label_collapses() {
        let d = role_domain();
        let pi1 = ClosedPredicate::attr_eq("role", "client");
        let sent = ClosedPredicate::and(
            ClosedPredicate::or(pi1.clone(), ClosedPredicate::attr_eq("role", "fwd")),
            ClosedPredicate::attr_ne("role", "fwd"),
        );
        assert!(equiv(&sent, &pi1, &d));
        let hop = ClosedPredicate::and(ClosedPredicate::attr_eq("role", "fwd"), ClosedPredicate::attr_ne("role", "fwd"));
        assert!(is_ff(&hop, &DomainContext::new()));
    }

    #[test]
    fn normal_forms() {
        let d = DomainContext::new();
        let p = ClosedPredicate::and(
            ClosedPredicate::atom(Rel::Eq, c("fwd"), a("role")),
            ClosedPredicate::negate(ClosedPredicate::attr_eq("id", "p")),
        );
        let n = normalize(&p, &d);
        assert_eq!(
            n,
            ClosedPredicate::and(ClosedPredicate::attr_eq("role", "fwd"), ClosedPredicate::attr_ne("id", "p"))
        );
        assert!(equiv(&n, &p, &d));
        let swapped = ClosedPredicate::and(
            ClosedPredicate::negate(ClosedPredicate::attr_eq("id", "p")),
            ClosedPredicate::attr_eq("role", "fwd"),
        );
        assert_eq!(normalize(&swapped, &d), n);
        assert_eq!(normalize(&ClosedPredicate::atom(Rel::Lt, a("a"), a("a")), &d), ClosedPredicate::False);
    }

    #[test]
    fn domains_reject_bad_declarations() {
        let mut d = DomainContext::new();
        assert!(d.declare("role", std::iter::empty()).is_err());
        d.declare("role", ["a".into()]).unwrap();
        assert!(d.declare("role", ["b".into()]).is_err());
        assert!(d.declare("role", ["a".into()]).is_ok());
    }
}
