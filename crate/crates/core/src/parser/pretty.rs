//! Printers producing text the parser reads back to the same terms.

use std::fmt::Write;

use super::abc::AbcFile;
use crate::predicates::{normalize, ClosedPredicate, DomainContext, Term};
use crate::semantics::{Label, Message};
use crate::terms::{AttributeEnv, Component, Expr, Predicate, Process, Update, Value};

/// Quote character used for names. Single quotes keep labels embeddable in
/// the double-quoted fields of `.aut` files.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quote {
    Double,
    Single,
}

pub fn value_text(v: &Value, q: Quote) -> String {
    let mut s = String::new();
    write_value(&mut s, v, q);
    s
}

fn write_value(out: &mut String, v: &Value, q: Quote) {
    match v {
        Value::Int(n) => write!(out, "{n}").unwrap(),
        Value::Bool(b) => write!(out, "{b}").unwrap(),
        Value::Name(n) => {
            let qc = if q == Quote::Double { '"' } else { '\'' };
            out.push(qc);
            for c in n.chars() {
                if c == '\\' || c == qc {
                    out.push('\\');
                }
                out.push(c);
            }
            out.push(qc);
        }
        Value::Tuple(items) => {
            out.push('[');
            write_list(out, items, q);
            out.push(']');
        }
        Value::Set(items) => {
            out.push('{');
            let items: Vec<Value> = items.iter().cloned().collect();
            write_list(out, &items, q);
            out.push('}');
        }
    }
}

fn write_list(out: &mut String, items: &[Value], q: Quote) {
    for (i, v) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_value(out, v, q);
    }
}

pub fn expr_text(e: &Expr) -> String {
    expr_q(e, Quote::Double)
}

fn expr_q(e: &Expr, q: Quote) -> String {
    match e {
        Expr::Const(v) => value_text(v, q),
        Expr::Var(x) | Expr::Attr(x) => x.clone(),
        Expr::This(a) => format!("this.{a}"),
        Expr::Msg(i) => format!("msg[{i}]"),
        Expr::Snd(a) => format!("snd.{a}"),
        Expr::Op(op, args) => {
            let args: Vec<String> = args.iter().map(|a| expr_q(a, q)).collect();
            match (op.symbol(), op.function_name()) {
                (Some(sym), _) if args.len() == 2 => format!("({} {sym} {})", args[0], args[1]),
                (_, Some(name)) => format!("{name}({})", args.join(", ")),
                _ => unreachable!("operator without concrete syntax"),
            }
        }
    }
}

pub fn pred_text(p: &Predicate) -> String {
    pred_q(p, Quote::Double)
}

fn pred_q(p: &Predicate, q: Quote) -> String {
    match p {
        Predicate::True => "tt".into(),
        Predicate::False => "ff".into(),
        Predicate::Atom(r, l, rr) => format!("{} {} {}", expr_q(l, q), r.symbol(), expr_q(rr, q)),
        Predicate::Not(p) => format!("!({})", pred_q(p, q)),
        Predicate::And(a, b) => format!("({} && {})", pred_q(a, q), pred_q(b, q)),
        Predicate::Or(a, b) => format!("({} || {})", pred_q(a, q), pred_q(b, q)),
    }
}

/// `tt`, `ff` or the predicate in parentheses.
fn pred_atom(p: &Predicate, q: Quote) -> String {
    match p {
        Predicate::True | Predicate::False => pred_q(p, q),
        other => format!("({})", pred_q(other, q)),
    }
}

pub fn closed_pred_text(p: &ClosedPredicate, q: Quote) -> String {
    let term = |t: &Term| match t {
        Term::Attr(a) => a.clone(),
        Term::Const(v) => value_text(v, q),
    };
    match p {
        ClosedPredicate::True => "tt".into(),
        ClosedPredicate::False => "ff".into(),
        ClosedPredicate::Atom(r, l, rr) => format!("{} {} {}", term(l), r.symbol(), term(rr)),
        ClosedPredicate::Not(p) => format!("!({})", closed_pred_text(p, q)),
        ClosedPredicate::And(a, b) => format!("({} && {})", closed_pred_text(a, q), closed_pred_text(b, q)),
        ClosedPredicate::Or(a, b) => format!("({} || {})", closed_pred_text(a, q), closed_pred_text(b, q)),
    }
}

fn closed_pred_atom(p: &ClosedPredicate, q: Quote) -> String {
    match p {
        ClosedPredicate::True | ClosedPredicate::False => closed_pred_text(p, q),
        other => format!("({})", closed_pred_text(other, q)),
    }
}

pub fn env_text(env: &AttributeEnv, q: Quote) -> String {
    let items: Vec<String> = env.iter().map(|(a, v)| format!("{a} = {}", value_text(v, q))).collect();
    format!("{{{}}}", items.join(", "))
}

fn updates_text(us: &[Update]) -> String {
    us.iter().map(|u| format!("[{} := {}]", u.attr, expr_text(&u.expr))).collect()
}

pub fn process_text(p: &Process) -> String {
    proc_at(p, 0)
}

// Levels: 0 choice, 1 parallel, 2 prefix.
fn proc_at(p: &Process, level: u8) -> String {
    match p {
        Process::Choice(a, b) => {
            let s = format!("{} + {}", proc_at(a, 0), proc_at(b, 1));
            if level > 0 {
                format!("({s})")
            } else {
                s
            }
        }
        Process::Par(a, b) => {
            let s = format!("{} | {}", proc_at(a, 1), proc_at(b, 2));
            if level > 1 {
                format!("({s})")
            } else {
                s
            }
        }
        Process::Nil => "0".into(),
        Process::Call(k, args) if args.is_empty() => k.clone(),
        Process::Call(k, args) => {
            let args: Vec<String> = args.iter().map(expr_text).collect();
            format!("{k}({})", args.join(", "))
        }
        Process::Aware(g, p) => format!("<({})> {}", pred_text(g), proc_at(p, 2)),
        Process::Output { args, pred, updates, cont } => {
            let args: Vec<String> = args.iter().map(expr_text).collect();
            format!(
                "({})@{}.{}{}",
                args.join(", "),
                pred_atom(pred, Quote::Double),
                updates_text(updates),
                proc_at(cont, 2)
            )
        }
        Process::Input { pred, vars, updates, cont } => {
            format!("{}({}).{}{}", pred_atom(pred, Quote::Double), vars.join(", "), updates_text(updates), proc_at(cont, 2))
        }
    }
}

pub fn component_text(c: &Component) -> String {
    match c {
        Component::Leaf { env, iface, proc } => {
            let iface: Vec<&str> = iface.iter().map(String::as_str).collect();
            format!(
                "comp {{ iface: [{}]; env: {}; run: {} }}",
                iface.join(", "),
                env_text(env, Quote::Double),
                process_text(proc)
            )
        }
        Component::Par(a, b) => {
            let right = if matches!(**b, Component::Par(..)) {
                format!("({})", component_text(b))
            } else {
                component_text(b)
            };
            format!("{} || {}", component_text(a), right)
        }
        Component::RestrictOut(f, c) => format!("restrictOut({}) {{ {} }}", pred_text(&f.template), component_text(c)),
        Component::RestrictIn(f, c) => format!("restrictIn({}) {{ {} }}", pred_text(&f.template), component_text(c)),
    }
}

pub fn message_text(m: &Message, q: Quote) -> String {
    let vals: Vec<String> = m.values.iter().map(|v| value_text(v, q)).collect();
    format!("{} {} ({})", env_text(&m.env, q), closed_pred_atom(&m.pred, q), vals.join(", "))
}

/// Compact label rendering with the predicate normalised, as used in
/// `.aut` output and witnesses.
pub fn label_text(l: &Label, domains: &DomainContext) -> String {
    let m = l.message();
    let shown = Message::new(m.env.clone(), normalize(&m.pred, domains), m.values.clone());
    let kind = match l {
        Label::Output(_) => "out",
        Label::Input(_) => "in",
        Label::Discard(_) => "discard",
    };
    format!("{kind} {}", message_text(&shown, Quote::Single))
}

/// Renders a whole model file. Named components are inlined into systems.
pub fn file_text(f: &AbcFile) -> String {
    let mut out = String::new();
    for (a, vals) in f.defs.domains.iter() {
        let vals: Vec<Value> = vals.iter().cloned().collect();
        let mut s = String::new();
        write_list(&mut s, &vals, Quote::Double);
        writeln!(out, "domain {a}: {{{s}}};").unwrap();
    }
    for (name, d) in f.defs.iter() {
        if d.params.is_empty() {
            writeln!(out, "def {name} = {};", process_text(&d.body)).unwrap();
        } else {
            writeln!(out, "def {name}({}) = {};", d.params.join(", "), process_text(&d.body)).unwrap();
        }
    }
    for (name, c) in &f.components {
        if let Component::Leaf { .. } = c {
            let text = component_text(c);
            writeln!(out, "comp {name} {}", &text["comp ".len()..]).unwrap();
        }
    }
    for (name, fun) in &f.functions {
        writeln!(out, "fn {name} = {};", pred_text(&fun.template)).unwrap();
    }
    if !f.universe.is_empty() {
        out.push_str("universe {\n");
        for m in &f.universe {
            writeln!(out, "    in {};", message_text(m, Quote::Double)).unwrap();
        }
        out.push_str("}\n");
    }
    for (name, c) in &f.systems {
        writeln!(out, "system {name} = {};", component_text(c)).unwrap();
    }
    if let Some(c) = &f.main {
        writeln!(out, "system {};", component_text(c)).unwrap();
    }
    out
}
