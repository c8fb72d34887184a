//! Abstract syntax of AbC: values, expressions, predicates, processes and
//! components, together with expression evaluation, environment restriction,
//! attribute updates and capture-avoiding substitution.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::EvalError;
use crate::predicates::DomainContext;

/// A first-class value carried by messages and stored in attribute
/// environments.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Name(String),
    Tuple(Vec<Value>),
    Set(BTreeSet<Value>),
}

impl Value {
    pub fn name(s: impl Into<String>) -> Self {
        Value::Name(s.into())
    }

    pub fn set<I: IntoIterator<Item = Value>>(items: I) -> Self {
        Value::Set(items.into_iter().collect())
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Int(n)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Name(s.to_string())
    }
}

/// Operators of the fixed expression catalogue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    Add,
    Sub,
    Mul,
    /// `tuple(e1, .., en)`
    Tuple,
    /// `get(t, i)`: projection of the i-th component of a tuple.
    Get,
    /// `insert(s, v)`
    Insert,
    /// `remove(s, v)`
    Remove,
    /// `contains(s, v)`, a boolean.
    Contains,
}

impl Op {
    /// Fixed arity, or `None` for the variadic tuple constructor.
    pub fn arity(self) -> Option<usize> {
        match self {
            Op::Tuple => None,
            _ => Some(2),
        }
    }

    pub fn function_name(self) -> Option<&'static str> {
        match self {
            Op::Tuple => Some("tuple"),
            Op::Get => Some("get"),
            Op::Insert => Some("insert"),
            Op::Remove => Some("remove"),
            Op::Contains => Some("contains"),
            _ => None,
        }
    }

    pub fn from_function_name(name: &str) -> Option<Op> {
        match name {
            "tuple" => Some(Op::Tuple),
            "get" => Some(Op::Get),
            "insert" => Some(Op::Insert),
            "remove" => Some(Op::Remove),
            "contains" => Some(Op::Contains),
            _ => None,
        }
    }

    pub fn symbol(self) -> Option<&'static str> {
        match self {
            Op::Add => Some("+"),
            Op::Sub => Some("-"),
            Op::Mul => Some("*"),
            _ => None,
        }
    }

    /// Applies the operator to fully evaluated arguments.
    pub fn apply(self, args: &[Value]) -> Result<Value, EvalError> {
        if let Some(n) = self.arity() {
            if args.len() != n {
                return Err(EvalError::OperatorDomain(format!(
                    "{self:?} expects {n} arguments, got {}",
                    args.len()
                )));
            }
        }
        let domain = |what: &str| EvalError::OperatorDomain(format!("{self:?}: {what}"));
        match self {
            Op::Add | Op::Sub | Op::Mul => {
                let (Some(a), Some(b)) = (args[0].as_int(), args[1].as_int()) else {
                    return Err(domain("integer operands required"));
                };
                let r = match self {
                    Op::Add => a.checked_add(b),
                    Op::Sub => a.checked_sub(b),
                    _ => a.checked_mul(b),
                };
                r.map(Value::Int).ok_or_else(|| domain("integer overflow"))
            }
            Op::Tuple => Ok(Value::Tuple(args.to_vec())),
            Op::Get => match (&args[0], &args[1]) {
                (Value::Tuple(items), Value::Int(i)) => usize::try_from(*i)
                    .ok()
                    .and_then(|i| items.get(i))
                    .cloned()
                    .ok_or_else(|| domain("index out of range")),
                _ => Err(domain("tuple and integer index required")),
            },
            Op::Insert | Op::Remove => match &args[0] {
                Value::Set(s) => {
                    let mut s = s.clone();
                    if self == Op::Insert {
                        s.insert(args[1].clone());
                    } else {
                        s.remove(&args[1]);
                    }
                    Ok(Value::Set(s))
                }
                _ => Err(domain("set operand required")),
            },
            Op::Contains => match &args[0] {
                Value::Set(s) => Ok(Value::Bool(s.contains(&args[1]))),
                _ => Err(domain("set operand required")),
            },
        }
    }
}

/// Expressions. `Msg` and `Snd` only occur inside restriction-function
/// templates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Const(Value),
    Var(String),
    /// A bare attribute identifier. Inside predicates it refers to the
    /// partner's attribute; inside expressions to the local one.
    Attr(String),
    /// `this.a`
    This(String),
    /// `msg[i]`
    Msg(usize),
    /// `snd.a`
    Snd(String),
    Op(Op, Vec<Expr>),
}

impl Expr {
    pub fn constant(v: impl Into<Value>) -> Self {
        Expr::Const(v.into())
    }

    pub fn var(x: impl Into<String>) -> Self {
        Expr::Var(x.into())
    }

    pub fn attr(a: impl Into<String>) -> Self {
        Expr::Attr(a.into())
    }

    pub fn this(a: impl Into<String>) -> Self {
        Expr::This(a.into())
    }

    pub fn op(op: Op, args: Vec<Expr>) -> Self {
        Expr::Op(op, args)
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(x) => {
                out.insert(x.clone());
            }
            Expr::Op(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }

    pub(crate) fn subst(&self, sigma: &BTreeMap<String, Value>) -> Expr {
        match self {
            Expr::Var(x) => match sigma.get(x) {
                Some(v) => Expr::Const(v.clone()),
                None => self.clone(),
            },
            Expr::Op(op, args) => Expr::Op(*op, args.iter().map(|a| a.subst(sigma)).collect()),
            _ => self.clone(),
        }
    }

    fn rename(&self, names: &BTreeMap<String, String>) -> Expr {
        match self {
            Expr::Var(x) => match names.get(x) {
                Some(y) => Expr::Var(y.clone()),
                None => self.clone(),
            },
            Expr::Op(op, args) => Expr::Op(*op, args.iter().map(|a| a.rename(names)).collect()),
            _ => self.clone(),
        }
    }

    pub(crate) fn map_consts(&self, f: &impl Fn(&Value) -> Value) -> Expr {
        match self {
            Expr::Const(v) => Expr::Const(f(v)),
            Expr::Op(op, args) => Expr::Op(*op, args.iter().map(|a| a.map_consts(f)).collect()),
            _ => self.clone(),
        }
    }

    /// True when a bare attribute occurs below an operator application.
    pub(crate) fn has_attr_under_op(&self, under_op: bool) -> bool {
        match self {
            Expr::Attr(_) => under_op,
            Expr::Op(_, args) => args.iter().any(|a| a.has_attr_under_op(true)),
            _ => false,
        }
    }
}

/// Relation symbols of atomic predicates. All atoms are binary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    In,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "==",
            Rel::Ne => "!=",
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
            Rel::In => "in",
        }
    }

    /// Truth of the relation on possibly undefined operands. An atom over an
    /// undefined operand is unsatisfied, except `!=` which is the complement
    /// of `==`.
    pub fn holds(self, lhs: Option<&Value>, rhs: Option<&Value>) -> bool {
        match self {
            Rel::Eq => matches!((lhs, rhs), (Some(a), Some(b)) if a == b),
            Rel::Ne => !Rel::Eq.holds(lhs, rhs),
            Rel::Lt | Rel::Le | Rel::Gt | Rel::Ge => {
                let (Some(Value::Int(a)), Some(Value::Int(b))) = (lhs, rhs) else {
                    return false;
                };
                match self {
                    Rel::Lt => a < b,
                    Rel::Le => a <= b,
                    Rel::Gt => a > b,
                    _ => a >= b,
                }
            }
            Rel::In => matches!((lhs, rhs), (Some(v), Some(Value::Set(s))) if s.contains(v)),
        }
    }
}

/// Predicates as written in processes, before closure.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Predicate {
    True,
    False,
    Atom(Rel, Expr, Expr),
    Not(Box<Predicate>),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
}

impl Predicate {
    pub fn atom(rel: Rel, lhs: Expr, rhs: Expr) -> Self {
        Predicate::Atom(rel, lhs, rhs)
    }

    pub fn eq(lhs: Expr, rhs: Expr) -> Self {
        Predicate::Atom(Rel::Eq, lhs, rhs)
    }

    pub fn negate(p: Predicate) -> Self {
        Predicate::Not(Box::new(p))
    }

    pub fn and(p: Predicate, q: Predicate) -> Self {
        Predicate::And(Box::new(p), Box::new(q))
    }

    pub fn or(p: Predicate, q: Predicate) -> Self {
        Predicate::Or(Box::new(p), Box::new(q))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Predicate::True | Predicate::False => {}
            Predicate::Atom(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Predicate::Not(p) => p.collect_vars(out),
            Predicate::And(p, q) | Predicate::Or(p, q) => {
                p.collect_vars(out);
                q.collect_vars(out);
            }
        }
    }

    pub(crate) fn map_exprs(&self, f: &impl Fn(&Expr) -> Expr) -> Predicate {
        match self {
            Predicate::True => Predicate::True,
            Predicate::False => Predicate::False,
            Predicate::Atom(r, l, rr) => Predicate::Atom(*r, f(l), f(rr)),
            Predicate::Not(p) => Predicate::negate(p.map_exprs(f)),
            Predicate::And(p, q) => Predicate::and(p.map_exprs(f), q.map_exprs(f)),
            Predicate::Or(p, q) => Predicate::or(p.map_exprs(f), q.map_exprs(f)),
        }
    }

    pub(crate) fn any_expr(&self, f: &impl Fn(&Expr) -> bool) -> bool {
        match self {
            Predicate::True | Predicate::False => false,
            Predicate::Atom(_, l, r) => f(l) || f(r),
            Predicate::Not(p) => p.any_expr(f),
            Predicate::And(p, q) | Predicate::Or(p, q) => p.any_expr(f) || q.any_expr(f),
        }
    }

    pub(crate) fn subst(&self, sigma: &BTreeMap<String, Value>) -> Predicate {
        self.map_exprs(&|e| e.subst(sigma))
    }

    fn rename(&self, names: &BTreeMap<String, String>) -> Predicate {
        self.map_exprs(&|e| e.rename(names))
    }
}

/// Γ: a finite partial map from attribute identifiers to values.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttributeEnv(BTreeMap<String, Value>);

impl AttributeEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, attr: &str) -> Option<&Value> {
        self.0.get(attr)
    }

    pub fn set(&mut self, attr: impl Into<String>, value: Value) {
        self.0.insert(attr.into(), value);
    }

    pub fn with(mut self, attr: impl Into<String>, value: impl Into<Value>) -> Self {
        self.set(attr, value.into());
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn domain(&self) -> BTreeSet<String> {
        self.0.keys().cloned().collect()
    }

    pub(crate) fn map_values(&self, f: &impl Fn(&Value) -> Value) -> Self {
        AttributeEnv(self.0.iter().map(|(k, v)| (k.clone(), f(v))).collect())
    }
}

impl FromIterator<(String, Value)> for AttributeEnv {
    fn from_iter<I: IntoIterator<Item = (String, Value)>>(iter: I) -> Self {
        AttributeEnv(iter.into_iter().collect())
    }
}

/// The exposed attributes of a component.
pub type Interface = BTreeSet<String>;

/// Γ↓I: keeps exactly the attributes of `iface` that `env` defines.
pub fn restrict_env(env: &AttributeEnv, iface: &Interface) -> AttributeEnv {
    env.iter()
        .filter(|(a, _)| iface.contains(*a))
        .map(|(a, v)| (a.clone(), v.clone()))
        .collect()
}

/// Substitution of variables by values.
pub type Subst = BTreeMap<String, Value>;

/// ⟦E⟧_Γ under a variable substitution.
pub fn eval_expr(expr: &Expr, env: &AttributeEnv, sigma: &Subst) -> Result<Value, EvalError> {
    match expr {
        Expr::Const(v) => Ok(v.clone()),
        Expr::Var(x) => sigma.get(x).cloned().ok_or_else(|| EvalError::UnboundVariable(x.clone())),
        Expr::Attr(a) | Expr::This(a) => {
            env.get(a).cloned().ok_or_else(|| EvalError::UndefinedAttribute(a.clone()))
        }
        Expr::Msg(_) | Expr::Snd(_) => Err(EvalError::TemplateOutsideRestriction),
        Expr::Op(op, args) => {
            let vals = args
                .iter()
                .map(|a| eval_expr(a, env, sigma))
                .collect::<Result<Vec<_>, _>>()?;
            op.apply(&vals)
        }
    }
}

/// `[a := E]`
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Update {
    pub attr: String,
    pub expr: Expr,
}

impl Update {
    pub fn new(attr: impl Into<String>, expr: Expr) -> Self {
        Update { attr: attr.into(), expr }
    }
}

/// Applies a sequence of updates left to right; each right-hand side sees the
/// environment produced by the previous update.
pub fn apply_updates(
    env: &AttributeEnv,
    updates: &[Update],
    domains: &DomainContext,
) -> Result<AttributeEnv, EvalError> {
    let mut env = env.clone();
    for up in updates {
        let v = eval_expr(&up.expr, &env, &Subst::new())?;
        if let Some(dom) = domains.domain(&up.attr) {
            if !dom.contains(&v) {
                return Err(EvalError::DomainViolation { attr: up.attr.clone(), value: v });
            }
        }
        env.set(up.attr.clone(), v);
    }
    Ok(env)
}

/// Processes. Updates are attached to the action they follow, which matches
/// the `act.U` production.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Process {
    Nil,
    Output { args: Vec<Expr>, pred: Predicate, updates: Vec<Update>, cont: Box<Process> },
    Input { pred: Predicate, vars: Vec<String>, updates: Vec<Update>, cont: Box<Process> },
    Aware(Predicate, Box<Process>),
    Choice(Box<Process>, Box<Process>),
    Par(Box<Process>, Box<Process>),
    Call(String, Vec<Expr>),
}

impl Process {
    pub fn output(args: Vec<Expr>, pred: Predicate, cont: Process) -> Self {
        Process::Output { args, pred, updates: Vec::new(), cont: Box::new(cont) }
    }

    pub fn output_with(args: Vec<Expr>, pred: Predicate, updates: Vec<Update>, cont: Process) -> Self {
        Process::Output { args, pred, updates, cont: Box::new(cont) }
    }

    pub fn input(pred: Predicate, vars: &[&str], cont: Process) -> Self {
        Process::Input {
            pred,
            vars: vars.iter().map(|v| v.to_string()).collect(),
            updates: Vec::new(),
            cont: Box::new(cont),
        }
    }

    pub fn input_with(pred: Predicate, vars: Vec<String>, updates: Vec<Update>, cont: Process) -> Self {
        Process::Input { pred, vars, updates, cont: Box::new(cont) }
    }

    pub fn aware(pred: Predicate, p: Process) -> Self {
        Process::Aware(pred, Box::new(p))
    }

    pub fn choice(p: Process, q: Process) -> Self {
        Process::Choice(Box::new(p), Box::new(q))
    }

    pub fn par(p: Process, q: Process) -> Self {
        Process::Par(Box::new(p), Box::new(q))
    }

    pub fn call(name: impl Into<String>, args: Vec<Expr>) -> Self {
        Process::Call(name.into(), args)
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
            Process::Nil => {}
            Process::Output { args, pred, updates, cont } => {
                args.iter().for_each(|a| a.collect_vars(out));
                pred.collect_vars(out);
                updates.iter().for_each(|u| u.expr.collect_vars(out));
                cont.collect_free(out);
            }
            Process::Input { pred, vars, updates, cont } => {
                let mut inner = BTreeSet::new();
                pred.collect_vars(&mut inner);
                updates.iter().for_each(|u| u.expr.collect_vars(&mut inner));
                cont.collect_free(&mut inner);
                out.extend(inner.into_iter().filter(|x| !vars.contains(x)));
            }
            Process::Aware(p, cont) => {
                p.collect_vars(out);
                cont.collect_free(out);
            }
            Process::Choice(p, q) | Process::Par(p, q) => {
                p.collect_free(out);
                q.collect_free(out);
            }
            Process::Call(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Simultaneous substitution `P[ṽ/x̃]`; inner input binders shadow.
    pub fn substitute(&self, vars: &[String], values: &[Value]) -> Result<Process, EvalError> {
        if vars.len() != values.len() {
            return Err(EvalError::ArityMismatch { expected: vars.len(), found: values.len() });
        }
        let sigma: Subst = vars.iter().cloned().zip(values.iter().cloned()).collect();
        Ok(self.subst(&sigma))
    }

    pub(crate) fn subst(&self, sigma: &Subst) -> Process {
        if sigma.is_empty() {
            return self.clone();
        }
        match self {
            Process::Nil => Process::Nil,
            Process::Output { args, pred, updates, cont } => Process::Output {
                args: args.iter().map(|a| a.subst(sigma)).collect(),
                pred: pred.subst(sigma),
                updates: subst_updates(updates, sigma),
                cont: Box::new(cont.subst(sigma)),
            },
            Process::Input { pred, vars, updates, cont } => {
                let mut inner = sigma.clone();
                for v in vars {
                    inner.remove(v);
                }
                Process::Input {
                    pred: pred.subst(&inner),
                    vars: vars.clone(),
                    updates: subst_updates(updates, &inner),
                    cont: Box::new(cont.subst(&inner)),
                }
            }
            Process::Aware(p, cont) => Process::aware(p.subst(sigma), cont.subst(sigma)),
            Process::Choice(p, q) => Process::choice(p.subst(sigma), q.subst(sigma)),
            Process::Par(p, q) => Process::par(p.subst(sigma), q.subst(sigma)),
            Process::Call(k, args) => Process::Call(k.clone(), args.iter().map(|a| a.subst(sigma)).collect()),
        }
    }

    /// Renames input binders to positional names so that α-equivalent
    /// processes become syntactically identical.
    pub fn canonical(&self) -> Process {
        self.canon(&BTreeMap::new(), 0)
    }

    fn canon(&self, names: &BTreeMap<String, String>, depth: usize) -> Process {
        match self {
            Process::Nil => Process::Nil,
            Process::Output { args, pred, updates, cont } => Process::Output {
                args: args.iter().map(|a| a.rename(names)).collect(),
                pred: pred.rename(names),
                updates: rename_updates(updates, names),
                cont: Box::new(cont.canon(names, depth)),
            },
            Process::Input { pred, vars, updates, cont } => {
                let mut inner = names.clone();
                let mut fresh = Vec::with_capacity(vars.len());
                for (i, v) in vars.iter().enumerate() {
                    let n = format!("_{}", depth + i);
                    inner.insert(v.clone(), n.clone());
                    fresh.push(n);
                }
                let depth = depth + vars.len();
                Process::Input {
                    pred: pred.rename(&inner),
                    vars: fresh,
                    updates: rename_updates(updates, &inner),
                    cont: Box::new(cont.canon(&inner, depth)),
                }
            }
            Process::Aware(p, cont) => Process::aware(p.rename(names), cont.canon(names, depth)),
            Process::Choice(p, q) => Process::choice(p.canon(names, depth), q.canon(names, depth)),
            Process::Par(p, q) => Process::par(p.canon(names, depth), q.canon(names, depth)),
            Process::Call(k, args) => Process::Call(k.clone(), args.iter().map(|a| a.rename(names)).collect()),
        }
    }

    pub(crate) fn map_consts(&self, f: &impl Fn(&Value) -> Value) -> Process {
        let ups = |us: &[Update]| -> Vec<Update> {
            us.iter().map(|u| Update { attr: u.attr.clone(), expr: u.expr.map_consts(f) }).collect()
        };
        match self {
            Process::Nil => Process::Nil,
            Process::Output { args, pred, updates, cont } => Process::Output {
                args: args.iter().map(|a| a.map_consts(f)).collect(),
                pred: pred.map_exprs(&|e| e.map_consts(f)),
                updates: ups(updates),
                cont: Box::new(cont.map_consts(f)),
            },
            Process::Input { pred, vars, updates, cont } => Process::Input {
                pred: pred.map_exprs(&|e| e.map_consts(f)),
                vars: vars.clone(),
                updates: ups(updates),
                cont: Box::new(cont.map_consts(f)),
            },
            Process::Aware(p, c) => Process::aware(p.map_exprs(&|e| e.map_consts(f)), c.map_consts(f)),
            Process::Choice(p, q) => Process::choice(p.map_consts(f), q.map_consts(f)),
            Process::Par(p, q) => Process::par(p.map_consts(f), q.map_consts(f)),
            Process::Call(k, args) => Process::Call(k.clone(), args.iter().map(|a| a.map_consts(f)).collect()),
        }
    }

    /// Whether the process contains an output prefix anywhere (`Act(P)`),
    /// looking through process calls.
    pub fn has_output(&self, defs: &Defs) -> bool {
        let mut seen = BTreeSet::new();
        self.has_output_inner(defs, &mut seen)
    }

    fn has_output_inner(&self, defs: &Defs, seen: &mut BTreeSet<String>) -> bool {
        match self {
            Process::Nil => false,
            Process::Output { .. } => true,
            Process::Input { cont, .. } | Process::Aware(_, cont) => cont.has_output_inner(defs, seen),
            Process::Choice(p, q) | Process::Par(p, q) => {
                p.has_output_inner(defs, seen) || q.has_output_inner(defs, seen)
            }
            Process::Call(k, _) => {
                if !seen.insert(k.clone()) {
                    return false;
                }
                defs.get(k).map(|d| d.body.has_output_inner(defs, seen)).unwrap_or(false)
            }
        }
    }

    /// Visits every predicate in the process (not through calls).
    pub(crate) fn calls(&self) -> Vec<(&str, usize)> {
        let mut out = Vec::new();
        self.collect_calls(&mut out, false);
        out
    }

    /// Calls reachable without passing through an action prefix.
    pub(crate) fn unguarded_calls(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_unguarded(&mut out);
        out
    }

    fn collect_calls<'a>(&'a self, out: &mut Vec<(&'a str, usize)>, _guarded: bool) {
        match self {
            Process::Nil => {}
            Process::Output { cont, .. } | Process::Input { cont, .. } | Process::Aware(_, cont) => {
                cont.collect_calls(out, true)
            }
            Process::Choice(p, q) | Process::Par(p, q) => {
                p.collect_calls(out, _guarded);
                q.collect_calls(out, _guarded);
            }
            Process::Call(k, args) => out.push((k, args.len())),
        }
    }

    fn collect_unguarded<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Process::Nil | Process::Output { .. } | Process::Input { .. } => {}
            Process::Aware(_, p) => p.collect_unguarded(out),
            Process::Choice(p, q) | Process::Par(p, q) => {
                p.collect_unguarded(out);
                q.collect_unguarded(out);
            }
            Process::Call(k, _) => out.push(k),
        }
    }
}

pub(crate) fn subst_updates(updates: &[Update], sigma: &Subst) -> Vec<Update> {
    updates.iter().map(|u| Update { attr: u.attr.clone(), expr: u.expr.subst(sigma) }).collect()
}

fn rename_updates(updates: &[Update], names: &BTreeMap<String, String>) -> Vec<Update> {
    updates.iter().map(|u| Update { attr: u.attr.clone(), expr: u.expr.rename(names) }).collect()
}

/// `f` in `[C]^{▷f}` / `[C]^{◁f}`: a predicate template over `msg[i]`
/// (transmitted values) and `snd.a` (the sender's exposed attributes).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RestrictionFn {
    pub template: Predicate,
}

impl RestrictionFn {
    pub fn new(template: Predicate) -> Self {
        RestrictionFn { template }
    }

    /// The constant function `ff`.
    pub fn block_all() -> Self {
        RestrictionFn { template: Predicate::False }
    }
}

/// Components.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Component {
    Leaf { env: AttributeEnv, iface: Interface, proc: Process },
    Par(Box<Component>, Box<Component>),
    RestrictOut(RestrictionFn, Box<Component>),
    RestrictIn(RestrictionFn, Box<Component>),
}

impl Component {
    pub fn leaf(env: AttributeEnv, iface: &[&str], proc: Process) -> Self {
        Component::Leaf { env, iface: iface.iter().map(|s| s.to_string()).collect(), proc }
    }

    pub fn par(c1: Component, c2: Component) -> Self {
        Component::Par(Box::new(c1), Box::new(c2))
    }

    pub fn restrict_out(f: RestrictionFn, c: Component) -> Self {
        Component::RestrictOut(f, Box::new(c))
    }

    pub fn restrict_in(f: RestrictionFn, c: Component) -> Self {
        Component::RestrictIn(f, Box::new(c))
    }

    /// Canonical representative: α-normalised input binders in every leaf.
    pub fn canonical(&self) -> Component {
        match self {
            Component::Leaf { env, iface, proc } => {
                Component::Leaf { env: env.clone(), iface: iface.clone(), proc: proc.canonical() }
            }
            Component::Par(a, b) => Component::par(a.canonical(), b.canonical()),
            Component::RestrictOut(f, c) => Component::restrict_out(f.clone(), c.canonical()),
            Component::RestrictIn(f, c) => Component::restrict_in(f.clone(), c.canonical()),
        }
    }

    pub fn leaves(&self) -> Vec<(&AttributeEnv, &Interface, &Process)> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<(&'a AttributeEnv, &'a Interface, &'a Process)>) {
        match self {
            Component::Leaf { env, iface, proc } => out.push((env, iface, proc)),
            Component::Par(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
            Component::RestrictOut(_, c) | Component::RestrictIn(_, c) => c.collect_leaves(out),
        }
    }

    /// Applies `f` to every constant value of the term (attribute values,
    /// expression constants, restriction templates).
    pub fn map_values(&self, f: &impl Fn(&Value) -> Value) -> Component {
        match self {
            Component::Leaf { env, iface, proc } => Component::Leaf {
                env: env.map_values(f),
                iface: iface.clone(),
                proc: proc.map_consts(f),
            },
            Component::Par(a, b) => Component::par(a.map_values(f), b.map_values(f)),
            Component::RestrictOut(r, c) => Component::restrict_out(
                RestrictionFn::new(r.template.map_exprs(&|e| e.map_consts(f))),
                c.map_values(f),
            ),
            Component::RestrictIn(r, c) => Component::restrict_in(
                RestrictionFn::new(r.template.map_exprs(&|e| e.map_consts(f))),
                c.map_values(f),
            ),
        }
    }
}

/// A process definition `K(x̃) ≜ P`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcDef {
    pub params: Vec<String>,
    pub body: Process,
}

/// Process definitions plus declared attribute domains: everything the
/// semantics needs beyond the component term itself.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Defs {
    procs: BTreeMap<String, ProcDef>,
    pub domains: DomainContext,
}

impl Defs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, params: Vec<String>, body: Process) {
        self.procs.insert(name.into(), ProcDef { params, body });
    }

    pub fn with(mut self, name: &str, params: &[&str], body: Process) -> Self {
        self.insert(name, params.iter().map(|p| p.to_string()).collect(), body);
        self
    }

    pub fn get(&self, name: &str) -> Option<&ProcDef> {
        self.procs.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &ProcDef)> {
        self.procs.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.procs.is_empty()
    }

    /// Merges `other` into `self`; definitions with the same name must agree.
    pub fn merge(&mut self, other: &Defs) -> Result<(), crate::error::ModelError> {
        for (k, d) in &other.procs {
            match self.procs.get(k) {
                Some(mine) if mine != d => {
                    return Err(crate::error::ModelError::ConflictingDefinition(k.clone()))
                }
                _ => {
                    self.procs.insert(k.clone(), d.clone());
                }
            }
        }
        self.domains.merge(&other.domains)
    }

    /// Checks that calls resolve with the right arity, that definition
    /// bodies are closed under their parameters and that every recursive
    /// cycle passes through an action prefix.
    pub fn validate(&self) -> Result<(), crate::error::ModelError> {
        use crate::error::ModelError;
        for (name, def) in &self.procs {
            let fv = def.body.free_vars();
            if let Some(x) = fv.iter().find(|x| !def.params.contains(x)) {
                return Err(ModelError::OpenDefinition { name: name.clone(), var: x.clone() });
            }
            self.check_calls(&def.body)?;
        }
        // unguarded call graph must be acyclic
        let mut state: BTreeMap<&str, u8> = BTreeMap::new();
        fn visit<'a>(
            defs: &'a Defs,
            k: &'a str,
            state: &mut BTreeMap<&'a str, u8>,
        ) -> Result<(), ModelError> {
            match state.get(k) {
                Some(1) => return Err(ModelError::UnguardedRecursion(k.to_string())),
                Some(_) => return Ok(()),
                None => {}
            }
            state.insert(k, 1);
            if let Some(d) = defs.procs.get(k) {
                for callee in d.body.unguarded_calls() {
                    visit(defs, callee, state)?;
                }
            }
            state.insert(k, 2);
            Ok(())
        }
        for k in self.procs.keys() {
            visit(self, k, &mut state)?;
        }
        Ok(())
    }

    pub fn check_calls(&self, p: &Process) -> Result<(), crate::error::ModelError> {
        use crate::error::ModelError;
        for (k, n) in p.calls() {
            match self.procs.get(k) {
                None => return Err(ModelError::UnknownProcess(k.to_string())),
                Some(d) if d.params.len() != n => {
                    return Err(ModelError::CallArity { name: k.to_string(), expected: d.params.len(), found: n })
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Validates a component against these definitions: closed leaf
    /// processes, resolvable calls, environment values inside declared
    /// domains.
    pub fn validate_component(&self, c: &Component) -> Result<(), crate::error::ModelError> {
        use crate::error::ModelError;
        for (env, _, proc) in c.leaves() {
            if let Some(x) = proc.free_vars().into_iter().next() {
                return Err(ModelError::OpenProcess(x));
            }
            self.check_calls(proc)?;
            for (a, v) in env.iter() {
                if let Some(dom) = self.domains.domain(a) {
                    if !dom.contains(v) {
                        return Err(ModelError::Eval(EvalError::DomainViolation { attr: a.clone(), value: v.clone() }));
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::pretty::value_text(self, crate::parser::pretty::Quote::Double))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, Value)]) -> AttributeEnv {
        pairs.iter().map(|(a, v)| (a.to_string(), v.clone())).collect()
    }

    #[test]
    fn eval_constant() {
        assert_eq!(eval_expr(&Expr::constant(5), &AttributeEnv::new(), &Subst::new()).unwrap(), Value::Int(5));
    }

    #[test]
    fn eval_this_reads_own_attribute() {
        let gp = env(&[
            ("role", "fwd".into()),
            ("id", "p".into()),
            ("nbr", Value::set(["f1".into(), "f4".into()])),
        ]);
        assert_eq!(eval_expr(&Expr::this("id"), &gp, &Subst::new()).unwrap(), Value::name("p"));
        assert_eq!(eval_expr(&Expr::attr("id"), &gp, &Subst::new()).unwrap(), Value::name("p"));
    }

    #[test]
    fn eval_arithmetic_matches_integer_addition() {
        let g = env(&[("a", 2.into())]);
        for k in -3..4i64 {
            let e = Expr::op(Op::Add, vec![Expr::attr("a"), Expr::constant(k)]);
            assert_eq!(eval_expr(&e, &g, &Subst::new()).unwrap(), Value::Int(2 + k));
        }
    }

    #[test]
    fn eval_errors() {
        let g = AttributeEnv::new();
        assert!(matches!(
            eval_expr(&Expr::attr("a"), &g, &Subst::new()),
            Err(EvalError::UndefinedAttribute(_))
        ));
        let proj = Expr::op(Op::Get, vec![Expr::constant(Value::Tuple(vec![1.into()])), Expr::constant(3)]);
        assert!(matches!(eval_expr(&proj, &g, &Subst::new()), Err(EvalError::OperatorDomain(_))));
        let set = Value::set([1.into()]);
        let ins = Expr::op(Op::Insert, vec![Expr::constant(set), Expr::constant(2)]);
        assert_eq!(eval_expr(&ins, &g, &Subst::new()).unwrap(), Value::set([1.into(), 2.into()]));
    }

    #[test]
    fn restrict_env_examples() {
        let g1 = env(&[
            ("id", "f1".into()),
            ("role", "fwd".into()),
            ("nbr", Value::set(["p".into(), "f2".into(), "f3".into()])),
        ]);
        let r = restrict_env(&g1, &["role".to_string()].into());
        assert_eq!(r, env(&[("role", "fwd".into())]));
        assert!(restrict_env(&g1, &Interface::new()).is_empty());
        assert!(restrict_env(&env(&[("a", 1.into())]), &["b".to_string()].into()).is_empty());
    }

    #[test]
    fn updates_apply_left_to_right() {
        let d = DomainContext::new();
        let g = env(&[("a", 2.into())]);
        assert_eq!(apply_updates(&g, &[], &d).unwrap(), g);
        let g2 = apply_updates(&g, &[Update::new("a", Expr::constant(5))], &d).unwrap();
        assert_eq!(g2, env(&[("a", 5.into())]));

        // oracle: fold the updates one at a time
        let ups = vec![
            Update::new("a", Expr::op(Op::Add, vec![Expr::attr("a"), Expr::constant(1)])),
            Update::new("b", Expr::attr("a")),
        ];
        let mut folded = env(&[("a", 1.into())]);
        for u in &ups {
            let v = eval_expr(&u.expr, &folded, &Subst::new()).unwrap();
            folded.set(u.attr.clone(), v);
        }
        let got = apply_updates(&env(&[("a", 1.into())]), &ups, &d).unwrap();
        assert_eq!(got, folded);
        assert_eq!(got, env(&[("a", 2.into()), ("b", 2.into())]));
    }

    #[test]
    fn update_domain_violation() {
        let mut d = DomainContext::new();
        d.declare("role", ["client".into(), "fwd".into()]).unwrap();
        let err = apply_updates(&AttributeEnv::new(), &[Update::new("role", Expr::constant("boss"))], &d);
        assert!(matches!(err, Err(EvalError::DomainViolation { .. })));
    }

    #[test]
    fn substitution_examples() {
        let p = Process::output(vec![Expr::var("x")], Predicate::True, Process::Nil);
        let q = p.substitute(&["x".into()], &[7.into()]).unwrap();
        assert_eq!(q, Process::output(vec![Expr::constant(7)], Predicate::True, Process::Nil));

        let inner = Process::output(vec![Expr::var("x")], Predicate::True, Process::Nil);
        let pi = Predicate::eq(Expr::attr("b"), Expr::var("y"));
        let p = Process::input(pi, &["x"], inner.clone());
        let q = p.substitute(&["y".into()], &[3.into()]).unwrap();
        let expected = Process::input(Predicate::eq(Expr::attr("b"), Expr::constant(3)), &["x"], inner);
        assert_eq!(q, expected);

        // binder shadows
        let q2 = p.substitute(&["x".into()], &[9.into()]).unwrap();
        assert_eq!(q2, p);

        assert!(matches!(
            p.substitute(&["x".into()], &[]),
            Err(EvalError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn substitution_removes_free_variable() {
        let p = Process::par(
            Process::output(vec![Expr::var("x"), Expr::var("z")], Predicate::True, Process::Nil),
            Process::input(Predicate::True, &["x"], Process::output(vec![Expr::var("x")], Predicate::True, Process::Nil)),
        );
        let once = p.substitute(&["x".into()], &[1.into()]).unwrap();
        let twice = once.substitute(&["x".into()], &[2.into()]).unwrap();
        assert_eq!(once, twice);
        assert_eq!(once.free_vars(), ["z".to_string()].into());
    }

    #[test]
    fn canonical_identifies_alpha_equivalent_terms() {
        let p = Process::input(Predicate::True, &["x"], Process::output(vec![Expr::var("x")], Predicate::True, Process::Nil));
        let q = Process::input(Predicate::True, &["y"], Process::output(vec![Expr::var("y")], Predicate::True, Process::Nil));
        assert_ne!(p, q);
        assert_eq!(p.canonical(), q.canonical());
    }

    #[test]
    fn unguarded_recursion_is_rejected() {
        let defs = Defs::new().with("K", &[], Process::choice(Process::call("K", vec![]), Process::Nil));
        assert!(defs.validate().is_err());
        let ok = Defs::new().with("K", &[], Process::output(vec![], Predicate::True, Process::call("K", vec![])));
        assert!(ok.validate().is_ok());
    }
}
